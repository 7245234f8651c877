"""Utility modules for nv-deer-sim"""
