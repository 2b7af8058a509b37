"""Quantum resource-manager service.

Accepts framed JSON requests, parses submitted QASM, queues jobs FIFO onto a
single backend worker (one simulated device), and retains results until
fetched. A configurable one-way delay is slept before each request is
processed, modelling the link latency of a remote (off-premise) device.
"""
from __future__ import annotations

import itertools
import queue
import socket
import threading
import time
from dataclasses import dataclass, field

from .. import sim
from ..circuit import DEFAULT_MAX_QUBITS
from ..qasm import QasmError, parse_qasm
from . import protocol


@dataclass
class _JobRecord:
    job_id: int
    circuit: object
    shots: int
    seed: int
    status: str = "Queued"  # Queued | Running | Done | Failed
    counts: list[int] | None = None
    server_wall_time: float = 0.0
    error_message: str = ""
    fetched_at: float | None = None


class ResourceManagerServer:
    """Threaded TCP server; one connection handler per client, one job worker."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0, *,
                 capacity: int = DEFAULT_MAX_QUBITS,
                 latency: float = 0.0,
                 result_ttl: float = 600.0,
                 optimization_pass=None):
        if latency < 0:
            raise ValueError("latency must be >= 0")
        self.capacity = capacity
        self.latency = latency
        self.result_ttl = result_ttl
        # Hook for circuit rewriting before execution; identity by default.
        self.optimization_pass = optimization_pass or (lambda circuit: circuit)

        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))  # raises OSError on unbindable address
        self._sock.listen()
        self.address: tuple[str, int] = self._sock.getsockname()

        self._jobs: dict[int, _JobRecord] = {}
        self._jobs_lock = threading.Lock()
        self._ids = itertools.count(1)
        self._queue: queue.Queue = queue.Queue()
        self._shutdown = threading.Event()

        self._worker = threading.Thread(target=self._run_jobs, daemon=True,
                                        name="resman-worker")
        self._acceptor = threading.Thread(target=self._accept_loop, daemon=True,
                                          name="resman-accept")

    def start(self) -> "ResourceManagerServer":
        self._worker.start()
        self._acceptor.start()
        return self

    def shutdown(self) -> None:
        """Stop accepting; the running job (if any) is drained first."""
        if self._shutdown.is_set():
            return
        self._shutdown.set()
        self._queue.put(None)
        try:
            self._sock.close()
        except OSError:
            pass
        self._worker.join(timeout=30)

    def __enter__(self) -> "ResourceManagerServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.shutdown()

    # Job execution

    def _run_jobs(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            record: _JobRecord = item
            with self._jobs_lock:
                record.status = "Running"
            started = time.monotonic()
            try:
                circuit = self.optimization_pass(record.circuit)
                histogram = sim.run_and_sample(circuit, record.shots, record.seed)
            except Exception as exc:
                with self._jobs_lock:
                    record.status = "Failed"
                    record.error_message = str(exc)
                continue
            with self._jobs_lock:
                record.status = "Done"
                record.counts = list(histogram.counts)
                record.server_wall_time = time.monotonic() - started

    # Connection handling

    def _accept_loop(self) -> None:
        while not self._shutdown.is_set():
            try:
                conn, _addr = self._sock.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_connection, args=(conn,),
                             daemon=True).start()

    def _serve_connection(self, conn: socket.socket) -> None:
        with conn:
            while not self._shutdown.is_set():
                try:
                    msg = protocol.recv_message(conn)
                except protocol.ProtocolError as exc:
                    # Per-request errors are answered, never dropped; a framing
                    # error poisons the stream, so close after answering.
                    try:
                        protocol.send_message(
                            conn, protocol.error("BAD_FRAME", str(exc)))
                    except OSError:
                        pass
                    return
                except OSError:
                    return
                if msg is None:
                    return
                if self.latency > 0:
                    time.sleep(self.latency)
                response = self._handle(msg)
                try:
                    protocol.send_message(conn, response)
                except OSError:
                    return

    def _handle(self, msg: dict) -> dict:
        self._evict_fetched()
        kind = msg["kind"]
        if kind == "Ping":
            return protocol.pong()
        if kind == "SubmitJob":
            return self._handle_submit(msg)
        if kind == "QueryStatus":
            record = self._lookup(msg)
            if record is None:
                return protocol.error("UNKNOWN_JOB", f"no job {msg['job_id']!r}")
            with self._jobs_lock:
                return protocol.status(record.status)
        if kind == "FetchResult":
            return self._handle_fetch(msg)
        return protocol.error("UNSUPPORTED", f"server cannot handle kind {kind!r}")

    def _handle_submit(self, msg: dict) -> dict:
        if not isinstance(msg["shots"], int) or msg["shots"] < 1:
            return protocol.error("BAD_REQUEST", "shots must be a positive integer")
        if not isinstance(msg["seed"], int) or msg["seed"] < 0:
            return protocol.error("BAD_REQUEST", "seed must be a non-negative integer")
        try:
            circuit = parse_qasm(msg["qasm"])
        except QasmError as exc:
            return protocol.error("PARSE", str(exc))
        if circuit.num_qubits > self.capacity:
            return protocol.error(
                "CAPACITY",
                f"circuit needs {circuit.num_qubits} qubits, capacity is {self.capacity}",
            )
        record = _JobRecord(next(self._ids), circuit, msg["shots"], msg["seed"])
        with self._jobs_lock:
            self._jobs[record.job_id] = record
        self._queue.put(record)
        return protocol.accepted(record.job_id)

    def _handle_fetch(self, msg: dict) -> dict:
        record = self._lookup(msg)
        if record is None:
            return protocol.error("UNKNOWN_JOB", f"no job {msg['job_id']!r}")
        with self._jobs_lock:
            if record.status == "Failed":
                return protocol.error("JOB_FAILED", record.error_message)
            if record.status != "Done":
                return protocol.error("NOT_READY",
                                      f"job {record.job_id} is {record.status}")
            record.fetched_at = time.monotonic()
            return protocol.result(record.counts, record.shots,
                                   record.server_wall_time)

    def _lookup(self, msg: dict) -> _JobRecord | None:
        job_id = msg["job_id"]
        with self._jobs_lock:
            return self._jobs.get(job_id)

    def _evict_fetched(self) -> None:
        cutoff = time.monotonic() - self.result_ttl
        with self._jobs_lock:
            stale = [jid for jid, rec in self._jobs.items()
                     if rec.fetched_at is not None and rec.fetched_at < cutoff]
            for jid in stale:
                del self._jobs[jid]


def serve(host: str = "127.0.0.1", port: int = 0, *,
          capacity: int = DEFAULT_MAX_QUBITS, latency: float = 0.0,
          result_ttl: float = 600.0, optimization_pass=None) -> ResourceManagerServer:
    """Bind and start a resource-manager server; returns the running server."""
    server = ResourceManagerServer(host, port, capacity=capacity, latency=latency,
                                   result_ttl=result_ttl,
                                   optimization_pass=optimization_pass)
    return server.start()
