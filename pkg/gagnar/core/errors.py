"""Exception hierarchy shared by the library and the CLI."""

from typing import Optional


class GagnarError(Exception):
    """Base class for every error raised by gagnar."""

    exit_code = 1


class ValidationError(GagnarError):
    """Inputs or configuration violate a documented precondition."""

    exit_code = 1


class NumericalError(GagnarError):
    """A numerical step failed (factorization, non-finite density, ...).

    Optional context is rendered into the message so the CLI can report
    which node, group or smoothing value was being processed.
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        node: Optional[int] = None,
        group: Optional[int] = None,
        h: Optional[float] = None,
    ):
        self.base_message = message
        self.node = node
        self.group = group
        self.h = h
        super().__init__(self._render())

    def _render(self) -> str:
        context = []
        if self.h is not None:
            context.append(f"h={self.h:g}")
        if self.node is not None:
            context.append(f"node={self.node}")
        if self.group is not None:
            context.append(f"group={self.group}")
        if not context:
            return self.base_message
        return f"{self.base_message} ({', '.join(context)})"

    def with_context(
        self,
        node: Optional[int] = None,
        group: Optional[int] = None,
        h: Optional[float] = None,
    ) -> "NumericalError":
        """Return a copy with missing context fields filled in."""
        return NumericalError(
            self.base_message,
            node=self.node if self.node is not None else node,
            group=self.group if self.group is not None else group,
            h=self.h if self.h is not None else h,
        )


class DataIOError(GagnarError):
    """A file could not be read, parsed or written."""

    exit_code = 3
