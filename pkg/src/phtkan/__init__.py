"""Sampled persistent homology transforms and their Kan extensions."""
