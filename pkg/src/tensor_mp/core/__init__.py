"""Index space, entry laws, random streams and the tensor sampling model."""
