"""Time-frequency transforms on finite grids and exact boundedness oracles for tau-Wigner maps."""
