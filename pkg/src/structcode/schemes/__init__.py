__all__ = [
    "inner",
    "embedding",
    "entrywise",
    "symmetric",
    "square",
]  # type: ignore
