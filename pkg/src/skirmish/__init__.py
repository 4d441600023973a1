"""Scripted-opponent micromanagement combat simulator and evaluation toolkit."""

__version__ = "0.1.0"
