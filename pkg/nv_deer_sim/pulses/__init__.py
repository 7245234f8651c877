"""Pulse sequences: data model, text mini-language and the pair engine."""
