"""Planning under an observer: p-graphs, label maps, stipulations and solvers."""
