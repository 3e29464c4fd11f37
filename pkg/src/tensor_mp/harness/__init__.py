"""Experiment harness: configuration, runners, reports and the CLI."""
