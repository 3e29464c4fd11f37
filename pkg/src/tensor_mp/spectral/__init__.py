"""Marchenko-Pastur law and empirical spectra."""
