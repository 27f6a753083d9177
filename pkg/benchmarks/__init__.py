"""Benchmark scripts for pyDCF."""
