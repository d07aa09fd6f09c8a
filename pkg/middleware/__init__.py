"""Middleware package for error handling"""
