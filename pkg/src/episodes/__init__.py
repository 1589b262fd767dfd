"""Episodes, their occurrence automata and event streams."""

__all__ = ["automaton", "errors", "model", "stream"]
