"""Ask an ontology questions in natural language: an LLM turns the question
into SPARQL against a schema-only prompt, an embedded engine answers from the
instance data, and every answer carries its query for verification."""

__version__ = "0.1.0"
