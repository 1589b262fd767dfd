"""
Tracing utilities for mining runs.

This module provides a centralized OpenTelemetry configuration for the
project. Without :func:`setup_tracing` every span goes to the OpenTelemetry
no-op tracer, so library code can be traced unconditionally.

Usage:
    from src.tracing import setup_tracing, get_tracer, traced

    # Export to a local OTLP/HTTP collector
    setup_tracing(endpoint="http://localhost:4318")

    # Or print finished spans to stderr
    setup_tracing(console=True)

    # Custom spans
    tracer = get_tracer(__name__)
    with tracer.start_as_current_span("mine-level"):
        pass

    # Or the decorator
    @traced("count")
    def count():
        pass
"""

import functools
import logging
import os
from collections.abc import Callable
from typing import Any, TypeVar

from opentelemetry import trace
from opentelemetry.trace import Tracer

logger = logging.getLogger(__name__)

# Type variable for generic function decoration
F = TypeVar("F", bound=Callable[..., Any])

_tracing_configured = False
_tracer_provider = None


def setup_tracing(
    *,
    endpoint: str | None = None,
    console: bool = False,
    service_name: str = "episode-miner",
) -> bool:
    """
    Install an OpenTelemetry tracer provider with the requested exporters.

    Args:
        endpoint: OTLP/HTTP collector base URL, e.g. "http://localhost:4318".
            Falls back to the EPISODE_MINER_OTLP_ENDPOINT environment variable.
        console: Also print finished spans to stderr.
        service_name: Name identifying this service in traces.

    Returns:
        True if tracing was configured, False if the SDK or exporter is missing
        or no exporter was requested.

    Example:
        >>> setup_tracing(console=True)
        True
    """
    global _tracing_configured, _tracer_provider

    if _tracing_configured:
        logger.warning("Tracing already configured, skipping re-initialization")
        return True

    endpoint = endpoint or os.environ.get("EPISODE_MINER_OTLP_ENDPOINT")
    if not endpoint and not console:
        logger.debug("No trace exporter requested, spans stay no-op")
        return False

    try:
        from opentelemetry.sdk.resources import Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import (
            BatchSpanProcessor,
            ConsoleSpanExporter,
            SimpleSpanProcessor,
        )

        resource = Resource.create({"service.name": service_name})
        tracer_provider = TracerProvider(resource=resource)

        if endpoint:
            from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter

            otlp_exporter = OTLPSpanExporter(endpoint=f"{endpoint.rstrip('/')}/v1/traces")
            tracer_provider.add_span_processor(BatchSpanProcessor(otlp_exporter))
            logger.info(f"OTLP tracing configured: {endpoint}")

        if console:
            tracer_provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
            logger.info("Console span exporter enabled")

        trace.set_tracer_provider(tracer_provider)
        _tracer_provider = tracer_provider
        _tracing_configured = True
        return True

    except ImportError as e:
        logger.error(
            f"Missing tracing packages: {e}\n"
            "Install with: uv pip install 'episode-miner[tracing]'"
        )
        return False
    except Exception as e:
        logger.error(f"Failed to configure tracing: {e}")
        return False


def get_tracer(name: str = __name__) -> Tracer:
    """
    Get an OpenTelemetry tracer instance for creating custom spans.

    Args:
        name: Name for the tracer, typically __name__ of the calling module.

    Returns:
        OpenTelemetry Tracer instance.
    """
    return trace.get_tracer(name)


def traced(
    span_name: str | None = None,
    *,
    attributes: dict[str, Any] | None = None,
) -> Callable[[F], F]:
    """
    Decorator to automatically create a span for a function.

    Args:
        span_name: Name for the span. Defaults to the function name.
        attributes: Optional dictionary of attributes to add to the span.

    Returns:
        Decorated function with automatic tracing.

    Example:
        >>> @traced("generate-candidates", attributes={"mining.mode": "serial"})
        ... def generate(book):
        ...     return book
    """

    def decorator(func: F) -> F:
        tracer = get_tracer(func.__module__)
        name = span_name or func.__name__

        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            with tracer.start_as_current_span(name) as span:
                if attributes:
                    for key, value in attributes.items():
                        span.set_attribute(key, value)

                try:
                    if args:
                        span.set_attribute("function.args_count", len(args))
                    if kwargs:
                        span.set_attribute("function.kwargs_keys", str(sorted(kwargs)))
                except Exception:
                    pass  # tracing must never fail the call

                return func(*args, **kwargs)

        return wrapper  # type: ignore

    return decorator


def add_span_attribute(key: str, value: Any) -> None:
    """
    Add an attribute to the current active span.

    Args:
        key: Attribute key, preferably one of :class:`MiningAttributes`.
        value: Attribute value (string, int, float, bool, or list of these).
    """
    span = trace.get_current_span()
    if span.is_recording():
        span.set_attribute(key, value)


def record_exception(exception: Exception, *, escaped: bool = True) -> None:
    """
    Record an exception on the current active span.

    Args:
        exception: The exception to record.
        escaped: Whether the exception escaped the span (default: True).
    """
    span = trace.get_current_span()
    if span.is_recording():
        span.record_exception(exception, escaped=escaped)


class MiningAttributes:
    """Span attribute names used by the miner, counter and generator."""

    LEVEL = "mining.level"
    CANDIDATES = "mining.candidates"
    FREQUENT = "mining.frequent"
    SURVIVORS = "mining.survivors"
    MODE = "mining.mode"
    H_MODE = "mining.h_mode"
    EXPIRY = "mining.expiry"
    STREAM_EVENTS = "stream.events"
    STREAM_ALPHABET = "stream.alphabet_size"


__all__ = [
    "setup_tracing",
    "get_tracer",
    "traced",
    "add_span_attribute",
    "record_exception",
    "MiningAttributes",
]
