"""Result persistence for experiment runs."""
