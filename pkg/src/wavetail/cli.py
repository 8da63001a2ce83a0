"""
Command-line interface for `wavetail`.

Every command reads an experiment configuration (the `barrier` preset by
default) and writes its tables through a single `ArtifactWriter`, so that
identical configurations give identical files.
"""

# Import standard modules
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple
import argparse
import configparser
import io
import logging
import sys

# Import third-party libraries
import numpy as np

# Import local modules
from . import __version__
from .asymptotics import asymptotic_nonescape, crossover_time, tail_expansion, tail_value
from .common import UNITS, ConfigError, format_value, read_csv, write_csv
from .config import ExperimentConfig, load_config
from .packets import (
    PacketSpec,
    free_evolution,
    mean_energy,
    momentum_amplitude,
    momentum_cutoff,
    momentum_norm,
    position_amplitude,
    support_violation,
)
from .potential import PotentialSpec, SquareBarrier, amplitudes, g_minus_derivatives
from .propagation import evolve_grid, evolve_spectral, minimum_half_width, relative_l2
from .observables import (
    ProbabilitySeries,
    fit_power_law,
    nonescape_series,
    profile_regions,
    select_window,
)
from .spectral import (
    SIGNS,
    derivative_table,
    spectral_amplitude,
    spectral_norm,
    spectral_profile,
)

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2

# Deviation of the asymptote below which the tail counts as reached
CROSSOVER_THRESHOLD = 0.15

# Agreement required between the two routes to psi_tilde^(n)(+-0)
DERIVATIVE_TOLERANCE = 1e-6

# Agreement required between transfer matrices and closed forms
TRANSFER_TOLERANCE = 1e-10


class Check(NamedTuple):
    """
    One entry of a pass/fail report; `passed` is None for skipped checks.
    """

    name: str
    passed: Optional[bool]
    detail: str


class ArtifactWriter:
    """
    Single writer for every file of a command, rooted at one directory.
    """

    def __init__(self, directory: Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.written: List[Path] = []

    def _path(self, name: str) -> Path:
        path = self.directory / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def table(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = write_csv(self._path(name), header, rows)
        self.written.append(path)
        LOGGER.info("Wrote %s", path)
        return path

    def text(self, name: str, content: str) -> Path:
        path = self._path(name)
        with open(path, "w", encoding="utf-8") as handler:
            handler.write(content)
        self.written.append(path)
        LOGGER.info("Wrote %s", path)
        return path


def _report(checks: Sequence[Check]) -> str:
    width = max([len(check.name) for check in checks] + [5])
    lines = [f"{'check':<{width}}  status  detail"]
    for check in checks:
        status = "skip" if check.passed is None else ("pass" if check.passed else "FAIL")
        lines.append(f"{check.name:<{width}}  {status:<6}  {check.detail}")
    return "\n".join(lines) + "\n"


def _orders(config: ExperimentConfig, packets: Optional[Sequence[str]]) -> Tuple[int, ...]:
    if not packets:
        return config.orders

    orders = []
    for item in packets:
        key, _, value = item.partition("=")
        if key.strip() != "m" or not value.strip().isdigit() or int(value) > 3:
            raise ConfigError([f"--packet: expected `m=<0..3>` (got {item!r})"])
        orders.append(int(value))
    return tuple(orders)


def _amplitude_grid(pot: PotentialSpec, packet: PacketSpec) -> np.ndarray:
    upper = 10.0 * pot.barrier_momentum if not pot.is_free else momentum_cutoff(packet)
    positive = np.geomspace(1e-3, upper, 200)
    return np.concatenate([-positive[::-1], positive])


def write_amplitudes(config: ExperimentConfig, writer: ArtifactWriter) -> Path:
    pot = config.potential()
    ks = _amplitude_grid(pot, config.packet(config.orders[0]))
    data = amplitudes(pot, ks)
    rows = [
        (k, g.real, g.imag, t.real, t.imag)
        for k, g, t in zip(ks, data.g_minus, data.transmission)
    ]
    return writer.table("amplitudes.csv", ["k", "re_g_minus", "im_g_minus", "re_g", "im_g"], rows)


def _write_packet(pot: PotentialSpec, packet: PacketSpec, config, writer, folder: str):
    ks = np.linspace(packet.k0 - config.cutoff / packet.a0, packet.k0 + config.cutoff / packet.a0, 801)
    values = momentum_amplitude(packet, ks)
    writer.table(
        f"{folder}/packet.csv",
        ["k", "re_psi_hat", "im_psi_hat"],
        zip(ks, values.real, values.imag),
    )
    xs = config.snapshot_xs()
    values = position_amplitude(packet, xs)
    writer.table(f"{folder}/packet_x.csv", ["x", "re_psi", "im_psi"], zip(xs, values.real, values.imag))


def _write_spectral(pot: PotentialSpec, packet: PacketSpec, config, writer, folder: str):
    profile = spectral_profile(pot, packet, config.vanishing, config.cutoff)
    writer.table(
        f"{folder}/spectral.csv",
        ["k", "re_psi_tilde", "im_psi_tilde"],
        zip(profile.ks, profile.values.real, profile.values.imag),
    )
    rows = []
    for method in ("formula", "contour"):
        table = derivative_table(pot, packet, method)
        for row, sign in enumerate(SIGNS):
            for n, value in enumerate(table[row]):
                rows.append((sign, n, value.real, value.imag, method))
    writer.table(f"{folder}/derivatives.csv", ["sign", "n", "re", "im", "method"], rows)

    return profile


def _write_fields(pot, packet, config, writer, folder: str, method: str = "spectral"):
    for t in config.snapshots:
        if method == "grid":
            half_width = minimum_half_width(packet, t)
            field = evolve_grid(pot, packet, half_width, config.dx, config.dt, t, config.scheme)
            field = field.restrict(config.snapshot_left, config.snapshot_right)
        else:
            field = evolve_spectral(pot, packet, config.snapshot_xs(), t, **config.quadrature())
        writer.table(
            f"{folder}/field_t{t:g}.csv",
            ["x", "t", "re_psi", "im_psi", "density"],
            (
                (x, field.t, value.real, value.imag, abs(value) ** 2)
                for x, value in zip(field.xs, field.values)
            ),
        )


def _write_tail(pot, packet, config, writer, folder: str, m: Optional[int] = None):
    times = config.times()
    expansion = tail_expansion(pot, packet, config.observation_xs(), m=m)
    probe = tail_expansion(pot, packet, [config.probe], m=expansion.m)
    probabilities, envelope = asymptotic_nonescape(expansion, times, config.left, config.right)
    at_probe = tail_value(probe, times)[:, 0]
    writer.table(
        f"{folder}/asymptote.csv",
        ["t", "probe_density", "probability", "envelope"],
        zip(times, np.abs(at_probe) ** 2, probabilities, envelope),
    )
    return expansion, at_probe


def _write_series(series: ProbabilitySeries, writer, folder: str):
    writer.table(
        f"{folder}/nonescape.csv",
        ["t", "probability", "method", "error", "probe_density"],
        zip(
            series.times,
            series.values,
            series.methods,
            series.errors,
            np.abs(series.probe_values) ** 2,
        ),
    )


def read_series(path: Path) -> ProbabilitySeries:
    """
    Read a `nonescape.csv` table back into a series.
    """

    rows = read_csv(path)
    if not rows:
        raise ConfigError([f"--input: no rows in `{path}`"])

    return ProbabilitySeries(
        float("nan"),
        float("nan"),
        np.array([float(row["t"]) for row in rows]),
        np.array([float(row["probability"]) for row in rows]),
        np.array([float(row["error"]) for row in rows]),
        tuple(row["method"] for row in rows),
    )


def _plot_script(config: ExperimentConfig, orders: Sequence[int]) -> str:
    curves = []
    for m in orders:
        curves.append(f'"m{m}/nonescape.csv" using 1:2 with lines lw 2 title "phi_{m}"')
        curves.append(f'"m{m}/asymptote.csv" using 1:3 with lines dt 2 title "phi_{m} asymptote"')
        curves.append(f'"m{m}/asymptote.csv" using 1:4 with lines dt 3 title "phi_{m} envelope"')

    return "\n".join(
        [
            f"# {UNITS}",
            f"# Nonescape probability on [{config.left:g}, {config.right:g}]",
            'set datafile separator ","',
            "set key autotitle columnhead",
            "set logscale xy",
            "set format y \"10^{%L}\"",
            'set xlabel "t"',
            'set ylabel "P(t)"',
            "plot " + ", \\\n     ".join(curves),
            "",
        ]
    )


def run(
    config: ExperimentConfig,
    orders: Sequence[int],
    out: Path,
    check: bool = False,
    window: Optional[Tuple[float, float]] = None,
) -> int:
    """
    Run the whole pipeline and write every artifact under `out`.

    Returns
    -------
    int
        The exit status: failed acceptance criteria give 2 when `check` is set.
    """

    pot = config.potential()
    writer = ArtifactWriter(out)
    write_amplitudes(config, writer)

    report = configparser.ConfigParser()
    checks: List[Check] = []
    for m in orders:
        packet = config.packet(m)
        folder = f"m{m}"
        LOGGER.info("Packet %s", packet)

        violation = support_violation(packet, pot)
        if violation > config.support:
            LOGGER.warning("Packet %s has mass %.3e on [-R, inf)", packet, violation)

        _write_packet(pot, packet, config, writer, folder)
        profile = _write_spectral(pot, packet, config, writer, folder)
        _write_fields(pot, packet, config, writer, folder)

        series = nonescape_series(
            pot,
            packet,
            config.times(),
            config.left,
            config.right,
            config.points,
            config.workers,
            config.probe,
            **config.quadrature(),
        )
        _write_series(series, writer, folder)
        expansion, at_probe = _write_tail(pot, packet, config, writer, folder, profile.vanishing_order)

        stable = True
        fit_window = window
        if fit_window is None:
            fit_window, stable = select_window(series, config.stability)
        fit = fit_power_law(series, fit_window)
        expected = -2.0 * expansion.leading_power

        exact = np.abs(series.probe_values)
        crossover = crossover_time(series.times, exact, np.abs(at_probe), CROSSOVER_THRESHOLD)
        late = series.times >= 10.0 * crossover if crossover is not None else np.zeros(0, bool)
        ratios = exact[late] / np.abs(at_probe[late]) if late.any() else np.zeros(0)
        regions = profile_regions(series)

        energy = mean_energy(packet)
        report[folder] = {
            "packet": str(packet),
            "vanishing_order": format_value(profile.vanishing_order),
            "leading_power": format_value(expansion.leading_power),
            "expected_exponent": format_value(expected),
            "exponent": format_value(fit.exponent),
            "stderr": format_value(fit.stderr),
            "r_squared": format_value(fit.r_squared),
            "window": f"{format_value(fit.window[0])}, {format_value(fit.window[1])}",
            "window_stable": format_value(stable),
            "points": format_value(fit.points),
            "crossover": "none" if crossover is None else format_value(crossover),
            "decay_start": "none" if regions.decay is None else format_value(regions.decay),
            "mean_energy": format_value(energy),
            "barrier_above_mean_energy": format_value(pot.barrier_momentum**2 > energy),
            "support_violation": format_value(violation),
        }

        deviation = abs(fit.exponent - expected)
        checks.append(
            Check(
                f"slope {folder}",
                deviation <= config.slope_tolerance(m),
                f"exponent {fit.exponent:.4f}, expected {expected:g}",
            )
        )
        if ratios.size:
            worst = float(np.max(np.abs(ratios - 1.0)))
            checks.append(
                Check(
                    f"asymptote {folder}",
                    worst <= config.ratio,
                    f"|ratio - 1| <= {worst:.3e} after t={10.0 * crossover:g}",
                )
            )
        else:
            checks.append(Check(f"asymptote {folder}", False, "tail not reached within schedule"))
        if pot.is_free:
            checks.append(Check(f"profile {folder}", None, "no revival without potential"))
        else:
            checks.append(
                Check(
                    f"profile {folder}",
                    regions.found,
                    f"first trough at t={regions.trough}, {regions.rises} rising steps, "
                    f"final decay from t={regions.decay}",
                )
            )

    buffer = io.StringIO()
    buffer.write(f"# {UNITS}\n")
    report.write(buffer)
    writer.text("fit_report.txt", buffer.getvalue())
    writer.text("nonescape.gp", _plot_script(config, orders))

    if check:
        text = _report(checks)
        print(text, end="")
        writer.text("check_report.txt", text)
        if any(entry.passed is False for entry in checks):
            return EXIT_FAILURE

    return EXIT_OK


def _scattering_checks(pot: PotentialSpec, config: ExperimentConfig) -> List[Check]:
    if pot.is_free:
        return [
            Check(name, None, "free particle")
            for name in ("unitarity", "zero-momentum limits", "transfer matrix")
        ]

    checks = []
    positive = np.geomspace(10.0 * pot.barrier_momentum / 1e6, 10.0 * pot.barrier_momentum, 200)
    ks = np.concatenate([-positive[::-1], positive])
    data = amplitudes(pot, ks)
    error = float(np.max(np.abs(np.abs(data.transmission) ** 2 + np.abs(data.reflection) ** 2 - 1)))
    checks.append(Check("unitarity", error <= config.unitarity, f"max error {error:.3e}"))

    tiny = amplitudes(pot, np.array([1e-9, -1e-9])).g_minus
    error = max(abs(tiny[0] + 1.0), abs(tiny[1]))
    limits = [g_minus_derivatives(pot, sign, 0)[0] for sign in SIGNS]
    error = max(error, abs(limits[0] + 1.0), abs(limits[1]))
    checks.append(Check("zero-momentum limits", error <= 1e-8, f"max error {error:.3e}"))

    if isinstance(pot, SquareBarrier):
        ks = np.geomspace(1e-3, 10.0 * pot.barrier_momentum, 200)
        ks = np.concatenate([-ks[::-1], ks])
        closed = amplitudes(pot, ks)
        transfer = amplitudes(pot.as_piecewise(), ks)
        error = float(
            max(
                np.max(np.abs(closed.g_minus - transfer.g_minus)),
                np.max(np.abs(closed.h_plus - transfer.h_plus)),
            )
        )
        checks.append(
            Check("transfer matrix", error <= TRANSFER_TOLERANCE, f"max difference {error:.3e}")
        )
    else:
        checks.append(Check("transfer matrix", None, "no closed form"))

    return checks


def _packet_checks(pot: PotentialSpec, packet: PacketSpec, config: ExperimentConfig) -> List[Check]:
    folder = f"m{packet.m}"
    checks = []

    error = abs(momentum_norm(packet) - 1.0)
    checks.append(Check(f"momentum norm {folder}", error <= config.norm, f"error {error:.3e}"))

    span = packet.a0 * (12.0 + 2.0 * packet.m)
    xs = np.linspace(packet.x0 - span, packet.x0 + span, 4001)
    transformed = position_amplitude(packet, xs)
    norm = float(np.sum(np.abs(transformed) ** 2) * (xs[1] - xs[0]))
    error = abs(norm - 1.0)
    checks.append(Check(f"position norm {folder}", error <= config.norm, f"error {error:.3e}"))

    error = float(np.max(np.abs(transformed - free_evolution(packet, xs, 0.0))))
    checks.append(Check(f"transform {folder}", error <= 1e-8, f"max difference {error:.3e}"))

    error = abs(spectral_norm(pot, packet, config.cutoff) - 1.0)
    checks.append(Check(f"spectral norm {folder}", error <= config.norm, f"error {error:.3e}"))

    profile = spectral_profile(pot, packet, config.vanishing, config.cutoff)
    checks.append(Check(f"vanishing order {folder}", True, f"m = {profile.vanishing_order}"))

    formula = derivative_table(pot, packet, "formula")
    oracle = derivative_table(pot, packet, "contour")
    error = float(np.max(np.abs(formula[:, :4] - oracle[:, :4])))
    checks.append(
        Check(f"derivative oracle {folder}", error <= DERIVATIVE_TOLERANCE, f"max difference {error:.3e}")
    )

    if pot.is_free:
        checks.append(Check(f"spectral at zero {folder}", None, "free particle"))
        checks.append(Check(f"overlap oracle {folder}", None, "free particle"))
        for t in config.oracle_times:
            xs = config.snapshot_xs()
            field = evolve_spectral(pot, packet, xs, t, **config.quadrature())
            error = float(np.max(np.abs(field.values - free_evolution(packet, xs, t))))
            checks.append(
                Check(f"free evolution t={t:g} {folder}", error <= 1e-8, f"max difference {error:.3e}")
            )
        return checks

    error = float(np.max(np.abs(formula[:, 0])))
    checks.append(Check(f"spectral at zero {folder}", error <= 1e-8, f"max |psi_tilde(+-0)| {error:.3e}"))

    ks = np.array([-1.0, -0.5, 0.5, 1.0])
    closed = spectral_amplitude(pot, packet, ks).values
    direct = spectral_amplitude(pot, packet, ks, method="quadrature").values
    error = float(np.max(np.abs(closed - direct)))
    checks.append(Check(f"overlap oracle {folder}", error <= 1e-6, f"max difference {error:.3e}"))

    for t in config.oracle_times:
        half_width = minimum_half_width(packet, t)
        grid = evolve_grid(pot, packet, half_width, config.dx, config.dt, t, config.scheme)
        checks.append(
            Check(
                f"grid norm t={t:g} {folder}",
                grid.norm_drift <= 1e-10,
                f"drift {grid.norm_drift:.3e}",
            )
        )
        grid = grid.restrict(config.snapshot_left, config.snapshot_right)
        field = evolve_spectral(pot, packet, grid.xs, t, **config.quadrature())
        error = relative_l2(grid.values, field.values)
        checks.append(
            Check(f"grid oracle t={t:g} {folder}", error <= config.oracle, f"relative L2 {error:.3e}")
        )

    return checks


def validate(config: ExperimentConfig, orders: Sequence[int]) -> List[Check]:
    """
    Run the invariant suite; failures are report entries, not exceptions.
    """

    pot = config.potential()
    checks = _scattering_checks(pot, config)
    for m in orders:
        checks.extend(_packet_checks(pot, config.packet(m), config))

    return checks


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="preset name or INI file (default: barrier)")
    common.add_argument(
        "--packet", action="append", metavar="m=N", help="packet order to process (repeatable)"
    )
    common.add_argument("--out", type=Path, help="output directory (default from the config)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("--quiet", action="store_true", help="log warnings only")

    parser = _Parser(
        prog="wavetail",
        description="Long-time tails of wave packets scattered by finite-range potentials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    window = dict(nargs=2, type=float, metavar=("T1", "T2"), help="fit window override")

    command = commands.add_parser("run", parents=[common], help="run the whole pipeline")
    command.add_argument("--check", action="store_true", help="exit 2 on failed criteria")
    command.add_argument("--window", **window)

    commands.add_parser("validate", parents=[common], help="run the invariant suite")
    commands.add_parser("amplitudes", parents=[common], help="tabulate scattering amplitudes")

    command = commands.add_parser("evolve", parents=[common], help="write field snapshots")
    command.add_argument("--method", choices=["spectral", "grid"], default="spectral")

    commands.add_parser("tail", parents=[common], help="write the asymptotic curves")

    command = commands.add_parser("fit", parents=[common], help="fit the nonescape tail")
    command.add_argument("--input", type=Path, help="nonescape.csv to fit instead of computing")
    command.add_argument("--window", **window)

    return parser


def _fit_command(args, config: ExperimentConfig, orders, out: Path) -> int:
    if args.input is not None:
        sources = [("input", read_series(args.input))]
    else:
        pot = config.potential()
        sources = [
            (
                f"m{m}",
                nonescape_series(
                    pot,
                    config.packet(m),
                    config.times(),
                    config.left,
                    config.right,
                    config.points,
                    config.workers,
                    **config.quadrature(),
                ),
            )
            for m in orders
        ]

    report = configparser.ConfigParser()
    for name, series in sources:
        stable = True
        window = tuple(args.window) if args.window else None
        if window is None:
            window, stable = select_window(series, config.stability)
        fit = fit_power_law(series, window)
        report[name] = {
            "exponent": format_value(fit.exponent),
            "stderr": format_value(fit.stderr),
            "r_squared": format_value(fit.r_squared),
            "window": f"{format_value(fit.window[0])}, {format_value(fit.window[1])}",
            "window_stable": format_value(stable),
            "points": format_value(fit.points),
        }

    buffer = io.StringIO()
    buffer.write(f"# {UNITS}\n")
    report.write(buffer)
    print(buffer.getvalue(), end="")
    ArtifactWriter(out).text("fit_report.txt", buffer.getvalue())

    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(args.config)
        orders = _orders(config, args.packet)
    except ConfigError as error:
        for message in error.messages:
            LOGGER.error(message)
        return EXIT_CONFIG

    out = args.out if args.out is not None else config.directory

    if args.command == "run":
        return run(config, orders, out, args.check, tuple(args.window) if args.window else None)

    if args.command == "validate":
        checks = validate(config, orders)
        text = _report(checks)
        print(text, end="")
        if args.out is not None:
            ArtifactWriter(out).text("validation.txt", text)
        return EXIT_FAILURE if any(check.passed is False for check in checks) else EXIT_OK

    if args.command == "amplitudes":
        write_amplitudes(config, ArtifactWriter(out))
        return EXIT_OK

    if args.command == "evolve":
        writer = ArtifactWriter(out)
        pot = config.potential()
        for m in orders:
            _write_fields(pot, config.packet(m), config, writer, f"m{m}", args.method)
        return EXIT_OK

    if args.command == "tail":
        writer = ArtifactWriter(out)
        pot = config.potential()
        for m in orders:
            _write_tail(pot, config.packet(m), config, writer, f"m{m}")
        return EXIT_OK

    try:
        return _fit_command(args, config, orders, out)
    except ConfigError as error:
        for message in error.messages:
            LOGGER.error(message)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
