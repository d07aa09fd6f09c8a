"""Variational classifier: encoders, ansatz builders, training and evaluation"""
