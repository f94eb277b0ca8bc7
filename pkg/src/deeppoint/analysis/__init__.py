"""Offline analysis of DeepPoint event logs."""

from .train_report import summarize_events

__all__ = ["summarize_events"]
