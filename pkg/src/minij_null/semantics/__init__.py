"""Symbol tables, nullness lattice and declaration-level nullability."""
