"""Helpers shared by the maxconv modules"""
