"""Various commands that can be run from the command line."""
