"""Control-flow graphs and the nullness dataflow analysis."""
