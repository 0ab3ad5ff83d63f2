"""Monodromy data, factorization backends and solution families"""
