"""Declarative experiment runner: scenarios, pipeline, and the command line."""
