"""Contours, Cauchy projections and the spectral relation"""
