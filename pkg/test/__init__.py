"""Test package for rtctimes."""
