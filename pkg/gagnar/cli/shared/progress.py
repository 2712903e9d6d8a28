"""Progress bar on stderr for long sampler runs."""

import sys
import threading
import time
from contextlib import contextmanager

from .colors import Colors
from .constants import PROGRESS_WIDTH


class ProgressBar:
    """Determinate progress; safe to update from worker threads."""

    def __init__(self, total, message="Progress", width=PROGRESS_WIDTH, enabled=True):
        self.total = total
        self.current = 0
        self.message = message
        self.width = width
        self.enabled = enabled
        self._start_time = None
        self._lock = threading.Lock()

    def start(self):
        self._start_time = time.time()
        self._render()

    def update(self, current=None, increment=1):
        with self._lock:
            if current is not None:
                self.current = current
            else:
                self.current += increment
            self._render()

    def _render(self):
        if not self.enabled:
            return
        if self.total == 0:
            percent = 100
        else:
            percent = min(100, int((self.current / self.total) * 100))

        filled = int((percent / 100) * self.width)
        bar = "█" * filled + "░" * (self.width - filled)
        sys.stderr.write(
            f"\r{self.message}: {Colors.CYAN}{bar}{Colors.RESET} "
            f"{Colors.BOLD}{percent:3d}%{Colors.RESET} ({self.current}/{self.total})"
        )
        sys.stderr.flush()

    def finish(self, success=True, final_message=None):
        if not self.enabled:
            return
        elapsed = format_duration(time.time() - self._start_time)
        icon, color = ("✓", Colors.GREEN) if success else ("✗", Colors.RED)
        msg = final_message or self.message
        sys.stderr.write(f"\r{color}{icon}{Colors.RESET} {msg} {Colors.DIM}({elapsed}){Colors.RESET}\n")
        sys.stderr.flush()


@contextmanager
def progress_bar(total, message="Progress", enabled=True):
    """Context manager for progress bar.

    Usage:
        with progress_bar(1500, "Sampling") as bar:
            for sweep in range(1500):
                bar.update()
    """
    bar = ProgressBar(total, message, enabled=enabled and sys.stderr.isatty())
    bar.start()
    try:
        yield bar
        bar.finish(success=True)
    except Exception:
        bar.finish(success=False, final_message=f"{message} failed")
        raise


def format_duration(seconds):
    """Format duration in human-readable format."""
    if seconds < 1:
        return f"{seconds * 1000:.1f} ms"
    elif seconds < 60:
        return f"{seconds:.2f} s"
    minutes = int(seconds // 60)
    return f"{minutes}m {seconds % 60:.1f}s"
