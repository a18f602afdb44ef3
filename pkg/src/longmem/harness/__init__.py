"""Command-line front-end, CSV/SVG writers and figure reproduction."""
