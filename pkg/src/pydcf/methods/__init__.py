"""Numerical methods; the DCF kernels live in `pydcf.methods.dcf`."""
