"""Run configuration: JSON schema, derived quantities and sequence templates."""
