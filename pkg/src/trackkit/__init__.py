"""Record, annotate, search, and report on computational results.

Scripts in a small analysis language are evaluated statement by
statement; chosen results are annotated with a feature set (who, when,
what code produced them, and type-specific descriptors), addressed by a
content hash, and kept in a searchable store.  Literate reports weave
prose and code while linking each displayed result back to the report
that produced it.
"""

__version__ = "0.1.0"
