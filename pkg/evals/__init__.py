"""Experiment harness: run configs and protocols."""
