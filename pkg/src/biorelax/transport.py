"""Publish/subscribe transports: in-process loopback and MQTT 3.1.1 broker.

The loopback transport delivers through an injectable delay model and either
a virtual clock (deterministic, instant) or a worker thread on the wall
clock, so the whole pipeline runs identically with or without a broker.
Broker mode speaks plain MQTT 3.1.1 over TCP at QoS 0.
"""
from __future__ import annotations

import heapq
import itertools
import os
import socket
import struct
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .clock import WallClock

BROKER_ENV_VAR = "BIORELAX_BROKER"
DEFAULT_QUEUE_CAP = 1024


class TransportError(RuntimeError):
    """Connection or delivery failure."""


# ---------------------------------------------------------------------------
# Delay models for the loopback leg


class ConstantDelay:
    def __init__(self, delay_ms: float):
        if delay_ms < 0:
            raise ValueError("delay must be >= 0")
        self.delay_ms = delay_ms

    def next_ms(self) -> float:
        return self.delay_ms

    def describe(self) -> str:
        return f"constant:{self.delay_ms:g}"


class UniformDelay:
    def __init__(self, lo_ms: float, hi_ms: float, seed: int = 0):
        if lo_ms < 0 or hi_ms < lo_ms:
            raise ValueError(f"need 0 <= lo <= hi, got [{lo_ms}, {hi_ms}]")
        self.lo_ms, self.hi_ms = lo_ms, hi_ms
        self._rng = np.random.default_rng(seed)

    def next_ms(self) -> float:
        return float(self._rng.uniform(self.lo_ms, self.hi_ms))

    def describe(self) -> str:
        return f"uniform:{self.lo_ms:g}:{self.hi_ms:g}"


class EmpiricalDelay:
    """Delays drawn (with replacement) from a recorded sample list."""

    def __init__(self, samples_ms, seed: int = 0):
        self.samples_ms = [float(s) for s in samples_ms]
        if not self.samples_ms:
            raise ValueError("empirical delay list is empty")
        if min(self.samples_ms) < 0:
            raise ValueError("delays must be >= 0")
        self._rng = np.random.default_rng(seed)

    def next_ms(self) -> float:
        return self.samples_ms[int(self._rng.integers(0, len(self.samples_ms)))]

    def describe(self) -> str:
        return f"empirical:n={len(self.samples_ms)}"


@dataclass
class TransportStats:
    published: int = 0
    delivered: int = 0
    overflow_dropped: int = 0
    handler_errors: int = 0


@dataclass
class TransportConfig:
    """Declarative transport selection; build the live object via create()."""

    mode: str = "loopback"  # "loopback" | "broker"
    broker_uri: str = "localhost:1883"
    delay_model: object = field(default_factory=lambda: ConstantDelay(0.0))
    queue_cap: int = DEFAULT_QUEUE_CAP

    def create(self, clock):
        if self.mode == "loopback":
            return LoopbackTransport(clock, self.delay_model, queue_cap=self.queue_cap)
        if self.mode == "broker":
            uri = os.environ.get(BROKER_ENV_VAR, self.broker_uri)
            return MqttTransport(uri, clock)
        raise ValueError(f"unknown transport mode {self.mode!r}")


class Subscription:
    def __init__(self, topic: str, handler: Callable[[bytes], None]):
        self.topic = topic
        self.handler = handler
        self.pending = 0
        self.last_delivery_ms = -float("inf")


class LoopbackTransport:
    """Lossless in-order pub/sub inside one process.

    Each publish draws one delay from the model; delivery times are clamped
    monotone per subscription so ordering matches MQTT's per-topic guarantee
    even when the model produces out-of-order delays. Pending deliveries per
    subscription are capped; overflow is counted, never silent.
    """

    def __init__(self, clock, delay_model=None, queue_cap: int = DEFAULT_QUEUE_CAP):
        self.clock = clock
        self.delay_model = delay_model or ConstantDelay(0.0)
        self.queue_cap = queue_cap
        self.stats = TransportStats()
        self._subs: list[Subscription] = []
        self._lock = threading.Lock()
        self._closed = False
        if not clock.virtual:
            self._heap: list[tuple[float, int, Subscription, bytes]] = []
            self._tie = itertools.count()
            self._wake = threading.Condition(self._lock)
            self._worker = threading.Thread(target=self._run_worker, daemon=True)
            self._worker.start()

    def subscribe(self, topic: str, handler: Callable[[bytes], None]) -> Subscription:
        if self._closed:
            raise TransportError("transport is closed")
        sub = Subscription(topic, handler)
        with self._lock:
            self._subs.append(sub)
        return sub

    def publish(self, topic: str, payload: bytes) -> float:
        if self._closed:
            raise TransportError("transport is closed")
        t_send = self.clock.now_ms()
        delay = self.delay_model.next_ms()
        with self._lock:
            targets = [s for s in self._subs if s.topic == topic]
            self.stats.published += 1
            for sub in targets:
                if sub.pending >= self.queue_cap:
                    self.stats.overflow_dropped += 1
                    continue
                at_ms = max(t_send + delay, sub.last_delivery_ms)
                sub.last_delivery_ms = at_ms
                sub.pending += 1
                if self.clock.virtual:
                    self.clock.schedule(at_ms, lambda s=sub, p=payload: self._deliver(s, p))
                else:
                    heapq.heappush(self._heap, (at_ms, next(self._tie), sub, payload))
                    self._wake.notify()
        return t_send

    def _deliver(self, sub: Subscription, payload: bytes) -> None:
        sub.pending -= 1
        self.stats.delivered += 1
        try:
            sub.handler(payload)
        except Exception:
            self.stats.handler_errors += 1

    def _run_worker(self) -> None:
        while True:
            with self._lock:
                while not self._closed and not self._heap:
                    self._wake.wait()
                if self._closed and not self._heap:
                    return
                at_ms, _, sub, payload = self._heap[0]
                wait_ms = at_ms - self.clock.now_ms()
                if wait_ms > 0:
                    self._wake.wait(timeout=wait_ms / 1000.0)
                    continue
                heapq.heappop(self._heap)
                sub.pending -= 1
                self.stats.delivered += 1
            try:
                sub.handler(payload)
            except Exception:
                self.stats.handler_errors += 1

    def close(self) -> None:
        with self._lock:
            self._closed = True
            if not self.clock.virtual:
                self._wake.notify_all()
        if not self.clock.virtual:
            self._worker.join(timeout=2.0)


# ---------------------------------------------------------------------------
# Minimal MQTT 3.1.1 client (QoS 0 publish/subscribe only)

_CONNECT, _CONNACK, _PUBLISH, _SUBSCRIBE, _SUBACK = 1, 2, 3, 8, 9
_PINGREQ, _PINGRESP, _DISCONNECT = 12, 13, 14


def _encode_remaining_length(n: int) -> bytes:
    out = bytearray()
    while True:
        byte = n % 128
        n //= 128
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _utf8_field(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack(">H", len(raw)) + raw


class MqttTransport:
    """QoS 0 client for a standard MQTT 3.1.1 broker over TCP.

    Connect retries 3 times with 0.5/1/2 s backoff, then fails loudly. The
    reader thread dispatches PUBLISH payloads to handlers (one at a time) and
    answers broker keepalive. ``BIORELAX_BROKER`` overrides the URI at the
    config layer.
    """

    KEEPALIVE_S = 30

    def __init__(self, broker_uri: str, clock=None, client_id: Optional[str] = None):
        self.clock = clock or WallClock()
        if self.clock.virtual:
            raise ValueError("broker mode requires a real clock")
        host, _, port = broker_uri.partition(":")
        self.host = host or "localhost"
        self.port = int(port) if port else 1883
        self.client_id = client_id or f"biorelax-{os.getpid()}-{int(time.time() * 1000) % 100000}"
        self.stats = TransportStats()
        self._handlers: dict[str, list[Callable[[bytes], None]]] = {}
        self._send_lock = threading.Lock()
        self._packet_id = itertools.count(1)
        self._suback = threading.Event()
        self._connack = threading.Event()
        self._connack_code = None
        self._closed = False
        self._sock = self._connect_with_backoff()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._pinger = threading.Thread(target=self._ping_loop, daemon=True)
        self._pinger.start()

    def _connect_with_backoff(self) -> socket.socket:
        last_error = None
        for attempt, backoff_s in enumerate((0.5, 1.0, 2.0), start=1):
            try:
                return self._connect_once()
            except OSError as exc:
                last_error = exc
                if attempt < 3:
                    time.sleep(backoff_s)
        raise TransportError(
            f"could not connect to broker {self.host}:{self.port} after 3 attempts: {last_error}"
        )

    def _connect_once(self) -> socket.socket:
        sock = socket.create_connection((self.host, self.port), timeout=5.0)
        sock.settimeout(5.0)
        var_header = (
            _utf8_field("MQTT")
            + bytes([0x04])          # protocol level 3.1.1
            + bytes([0x02])          # clean session
            + struct.pack(">H", self.KEEPALIVE_S)
        )
        payload = _utf8_field(self.client_id)
        body = var_header + payload
        sock.sendall(bytes([_CONNECT << 4]) + _encode_remaining_length(len(body)) + body)
        packet_type, _, body = self._read_packet_from(sock)
        if packet_type != _CONNACK or len(body) < 2 or body[1] != 0:
            sock.close()
            raise OSError(f"broker refused connection (CONNACK code {body[1] if len(body) > 1 else '?'})")
        sock.settimeout(None)
        return sock

    def publish(self, topic: str, payload: bytes) -> float:
        if self._closed:
            raise TransportError("transport is closed")
        body = _utf8_field(topic) + payload
        frame = bytes([_PUBLISH << 4]) + _encode_remaining_length(len(body)) + body
        t_send = self.clock.now_ms()
        try:
            with self._send_lock:
                self._sock.sendall(frame)
        except OSError as exc:
            raise TransportError(f"publish failed: {exc}") from None
        self.stats.published += 1
        return t_send

    def subscribe(self, topic: str, handler: Callable[[bytes], None]) -> Subscription:
        if self._closed:
            raise TransportError("transport is closed")
        sub = Subscription(topic, handler)
        self._handlers.setdefault(topic, []).append(handler)
        packet_id = next(self._packet_id) & 0xFFFF or 1
        body = struct.pack(">H", packet_id) + _utf8_field(topic) + bytes([0])
        frame = bytes([(_SUBSCRIBE << 4) | 0x02]) + _encode_remaining_length(len(body)) + body
        self._suback.clear()
        try:
            with self._send_lock:
                self._sock.sendall(frame)
        except OSError as exc:
            raise TransportError(f"subscribe failed: {exc}") from None
        if not self._suback.wait(timeout=5.0):
            raise TransportError(f"no SUBACK for {topic!r}")
        return sub

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            with self._send_lock:
                self._sock.sendall(bytes([_DISCONNECT << 4, 0]))
        except OSError:
            pass
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()

    # -- wire reading ------------------------------------------------------

    @staticmethod
    def _read_exact(sock: socket.socket, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            chunk = sock.recv(n - len(buf))
            if not chunk:
                raise OSError("connection closed by broker")
            buf.extend(chunk)
        return bytes(buf)

    @classmethod
    def _read_packet_from(cls, sock: socket.socket):
        first = cls._read_exact(sock, 1)[0]
        length, shift = 0, 0
        while True:
            byte = cls._read_exact(sock, 1)[0]
            length |= (byte & 0x7F) << shift
            if not byte & 0x80:
                break
            shift += 7
            if shift > 21:
                raise OSError("malformed remaining length")
        body = cls._read_exact(sock, length) if length else b""
        return first >> 4, first & 0x0F, body

    def _read_loop(self) -> None:
        try:
            while not self._closed:
                packet_type, _, body = self._read_packet_from(self._sock)
                if packet_type == _PUBLISH:
                    topic_len = struct.unpack(">H", body[:2])[0]
                    topic = body[2:2 + topic_len].decode("utf-8")
                    payload = body[2 + topic_len:]
                    for handler in self._handlers.get(topic, []):
                        self.stats.delivered += 1
                        try:
                            handler(payload)
                        except Exception:
                            self.stats.handler_errors += 1
                elif packet_type == _SUBACK:
                    self._suback.set()
                elif packet_type == _PINGRESP:
                    pass
        except OSError:
            if not self._closed:
                self._closed = True

    def _ping_loop(self) -> None:
        interval_s = self.KEEPALIVE_S / 2
        while not self._closed:
            time.sleep(interval_s)
            if self._closed:
                return
            try:
                with self._send_lock:
                    self._sock.sendall(bytes([_PINGREQ << 4, 0]))
            except OSError:
                return
