"""Bessel functions, metric assembly and closed-form references"""
