"""Static SVG figures."""
