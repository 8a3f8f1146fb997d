# Numerical primitives, errors and random streams
