"""Instance generation, experiments, dataset export and regression."""
