"""Utility functions package: run manifests and artefact I/O"""
