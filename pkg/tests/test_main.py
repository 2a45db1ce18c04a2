"""Test the command interface."""
from unittest.mock import patch

import testhelpers

from shape_inversion.__main__ import allowed_commands, main as shape_inversion_main


def _run_main_cmd(arg_list, expected_exit=0):
    argv_patch = ["shape_inversion"]
    argv_patch.extend(arg_list)

    with patch("sys.argv", argv_patch):
        with testhelpers.expect_exit(expected_exit):
            shape_inversion_main()


def test_print_version(capsys):
    """Print the version when asked."""
    _run_main_cmd(["version"])

    output = capsys.readouterr()
    expected_output = "shape_inversion, Version"  # Skip the details, so it will match any version
    assert expected_output in output.out


def test_unrecognized_command(capsys):
    """Throw an error on an unrecognized sub-command."""
    with patch("sys.argv", ["shape_inversion", "definitely-not-a-real-command"]):
        with testhelpers.expect_exit_with_output(capsys, "Unrecognized command", -1):
            shape_inversion_main()


def test_command_is_case_insensitive(capsys):
    """Accept command names in any case."""
    _run_main_cmd(["VERSION"])

    assert "Version" in capsys.readouterr().out


def test_all_commands_help(capsys):
    """Display help menu from all commands."""
    for command in allowed_commands:
        _run_main_cmd([command, "--help"])
