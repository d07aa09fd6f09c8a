"""Density-matrix simulation core: linear algebra, circuits, noise channels and the simulator"""
