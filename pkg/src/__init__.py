# ESN Pruning Package
