"""Sampling-based ALS for CP and tensor-ring decompositions."""
