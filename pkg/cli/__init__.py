"""Command-line surface of the experiment harness."""
