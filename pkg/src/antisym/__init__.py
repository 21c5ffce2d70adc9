"""Recursive antisymmetrization circuits for first-quantized fermions."""
