"""Verification engine, report I/O and command line interface."""
