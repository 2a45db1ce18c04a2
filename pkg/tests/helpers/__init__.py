"""Test the helper functions."""
