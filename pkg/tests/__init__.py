"""
Test package for faslab.

This package contains all unit tests for the faslab library.
"""
