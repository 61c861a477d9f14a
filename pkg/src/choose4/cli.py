"""Command-line interface.

The CLI is a thin client: every data command builds a JSON request from
the given config file and sends it to the HTTP service — in-process via
an ASGI transport by default, or to a running server with ``--server``.
Rendering then happens on the response document only, so the CLI never
recomputes anything the service reported.

Commands:
    solve      resolve one 4-of-6 analysis
    plan       build a monitoring plan and print its table + joint OCs
    ocs        joint operating characteristics at chosen true hazard ratios
    simulate   patient-level Monte Carlo check of a schedule
    figure1    power-holding threshold curve with grid snapping
    bundled    list or copy the packaged example configs
    serve      run the HTTP service

Exit codes: 0 success, 2 usage/validation, 3 domain/infeasible, 4 internal.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from importlib import resources

import httpx

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_INTERNAL = 4

FORMATS = ("markdown", "csv", "doc")

PARAM_COLUMNS = ("d", "theta_star", "alpha", "power", "theta0", "theta1")


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class ApiClient:
    """POST/GET against the service, in-process unless a server URL is given."""

    def __init__(self, server: str | None = None):
        self.server = server

    def request(self, method: str, path: str, payload: dict | None = None) -> dict:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=600.0) as client:
                response = client.request(method, path, json=payload)
        else:
            response = asyncio.run(self._in_process(method, path, payload))
        try:
            body = response.json()
        except ValueError:
            raise CliError(f"service returned non-JSON ({response.status_code})",
                           EXIT_INTERNAL)
        if response.status_code >= 400:
            code = body.get("code", "internal")
            detail = body.get("detail", "")
            exit_code = {422: EXIT_USAGE, 413: EXIT_USAGE,
                         400: EXIT_DOMAIN}.get(response.status_code, EXIT_INTERNAL)
            raise CliError(f"error[{code}]: {detail}", exit_code)
        return body

    async def _in_process(self, method: str, path: str, payload: dict | None):
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://choose4") as client:
            return await client.request(method, path, json=payload)


# ---------------------------------------------------------------------------
# config handling


def load_config(spec: str) -> dict:
    """Read a JSON config from a path or a ``bundled:<name>`` reference."""
    if spec.startswith("bundled:"):
        text = _bundled_text(spec.split(":", 1)[1])
    else:
        try:
            with open(spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read config {spec!r}: {exc}", EXIT_USAGE)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"config {spec!r} is not valid JSON: {exc}", EXIT_USAGE)
    if not isinstance(obj, dict):
        raise CliError(f"config {spec!r} must be a JSON object", EXIT_USAGE)
    # bundled files wrap the request so they can carry a description
    if "request" in obj:
        return obj["request"]
    return obj


def bundled_configs() -> list[dict]:
    """Name + description + command for every packaged config."""
    entries = []
    root = resources.files("choose4").joinpath("bundled")
    for item in sorted(root.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".json"):
            obj = json.loads(item.read_text(encoding="utf-8"))
            entries.append({"name": item.name[:-5],
                            "command": obj.get("command", "plan"),
                            "description": obj.get("description", "")})
    return entries


def _bundled_text(name: str) -> str:
    path = resources.files("choose4").joinpath("bundled", f"{name}.json")
    try:
        return path.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        known = ", ".join(e["name"] for e in bundled_configs())
        raise CliError(f"no bundled config named {name!r} (have: {known})",
                       EXIT_USAGE)


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    if not os.path.isabs(out):
        out = os.path.join(os.environ.get("CHOOSE4_OUT_DIR", ""), out)
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# rendering


def _doc(body: dict) -> str:
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def _mark(cell: dict) -> str:
    return cell["display"] + ("*" if cell["chosen"] else "")


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines)


def _csv_lines(header: list[str], rows: list[list[str]]) -> str:
    out = [",".join(header)]
    out += [",".join(row) for row in rows]
    return "\n".join(out) + "\n"


def render_solve(body: dict, fmt: str) -> str:
    if fmt == "doc":
        return _doc(body)
    params = body["parameters"]
    order = ("theta0", "theta1", "d", "theta_star", "alpha", "beta")
    if fmt == "csv":
        rows = [[name, repr(params[name]["value"]),
                 "chosen" if params[name]["chosen"] else "derived"]
                for name in order]
        return _csv_lines(["parameter", "value", "role"], rows)
    rows = [[name, _mark(params[name])] for name in order]
    lines = ["# single-analysis solution", "",
             _md_table(["parameter", "value"], rows), "",
             f"solve route: {body['solve_route']}; "
             f"unknowns: {', '.join(body['unknowns'])}"]
    note = body.get("rounding")
    if note:
        lines.append(f"rounding: d {note['d_exact']:.4f} -> "
                     f"{note['d_rounded']:.0f} ({note['policy']}); "
                     f"{note['floated']} floated from "
                     f"{note['floated_chosen']:.4f}")
    for warning in body.get("warnings", []):
        lines.append(f"warning: {warning}")
    lines += ["", "\\* chosen directly; other values derived.", ""]
    return "\n".join(lines)


def _stage_rows(body: dict) -> list[list[str]]:
    rows = []
    for stage in body["stages"]:
        cells = stage["cells"]
        rows.append([stage["label"]] + [_mark(cells[c]) for c in PARAM_COLUMNS])
    return rows


def _oc_rows(body: dict) -> list[list[str]]:
    rows = []
    for oc in body["ocs"]:
        d = oc["display"]
        rows.append([d["true_hr"], d["prob_all_met"],
                     d["prob_flagged_at_least_once"], d["prob_at_least_one_met"]])
    return rows


def render_plan(body: dict, fmt: str) -> str:
    if fmt == "doc":
        return _doc(body)
    if fmt == "csv":
        rows = []
        for stage in body["stages"]:
            cells = stage["cells"]
            chosen = ";".join(c for c in PARAM_COLUMNS if cells[c]["chosen"])
            rows.append([stage["label"]]
                        + [repr(cells[c]["value"]) for c in PARAM_COLUMNS]
                        + [chosen])
        return _csv_lines(["look"] + list(PARAM_COLUMNS) + ["chosen"], rows)
    lines = [f"# {body['strategy']} monitoring plan", "",
             _md_table(["look"] + list(PARAM_COLUMNS), _stage_rows(body)),
             "", "\\* chosen directly; other values derived."]
    for warning in body.get("warnings", []):
        lines.append(f"warning: {warning}")
    if body.get("ocs"):
        oc0 = body["ocs"][0]
        lines += ["", "## joint operating characteristics", "",
                  _md_table(["true HR", "P(all met)", "P(flagged >=1)",
                             "P(>=1 met)"], _oc_rows(body)),
                  "",
                  f"{oc0['method']} with {oc0['n_samples']} samples; "
                  f"max std error {max(o['std_error'] for o in body['ocs']):.1e}."]
    lines.append("")
    return "\n".join(lines)


def render_ocs(body: dict, fmt: str) -> str:
    if fmt == "doc":
        return _doc(body)
    if fmt == "csv":
        rows = [[repr(oc["true_hr"]), repr(oc["prob_all_met"]),
                 repr(oc["prob_flagged_at_least_once"]),
                 repr(oc["prob_at_least_one_met"]), repr(oc["std_error"])]
                for oc in body["ocs"]]
        return _csv_lines(["true_hr", "prob_all_met", "prob_flagged_at_least_once",
                           "prob_at_least_one_met", "std_error"], rows)
    looks = ", ".join(s["cells"]["d"]["display"] for s in body["stages"])
    oc0 = body["ocs"][0]
    lines = [f"# joint operating characteristics: {body['strategy']} "
             f"at looks {looks}", "",
             _md_table(["true HR", "P(all met)", "P(flagged >=1)", "P(>=1 met)"],
                       _oc_rows(body)),
             "",
             f"{oc0['method']} with {oc0['n_samples']} samples; "
             f"max std error {max(o['std_error'] for o in body['ocs']):.1e}.", ""]
    return "\n".join(lines)


def render_simulate(body: dict, fmt: str) -> str:
    if fmt == "doc":
        return _doc(body)
    if fmt == "csv":
        rows = [[str(s["d"]), repr(s["threshold"]), repr(s["flag_rate"]),
                 repr(s["flag_rate_se"]), repr(s["mean_log_hr"]),
                 repr(s["sd_log_hr"])]
                for s in body["stages"]]
        return _csv_lines(["d", "threshold", "flag_rate", "flag_rate_se",
                           "mean_log_hr", "sd_log_hr"], rows)
    d = body["display"]
    rows = [[str(s["d"]), f"{s['threshold']:.3f}", f"{s['flag_rate']:.3f}",
             f"{s['mean_log_hr']:.3f}", f"{s['sd_log_hr']:.3f}"]
            for s in body["stages"]]
    lines = ["# simulated operating characteristics", "",
             f"replicates: {body['n_reps']} "
             f"(effective {body['n_effective']}, degenerate {body['n_degenerate']}, "
             f"insufficient {body['n_insufficient']})",
             f"P(all met) = {d['prob_all_met']} "
             f"(se {body['prob_all_met_se']:.4f})",
             f"P(flagged >=1) = {d['prob_flagged_at_least_once']}",
             f"P(>=1 met) = {d['prob_at_least_one_met']} "
             f"(se {body['prob_at_least_one_met_se']:.4f})", "",
             _md_table(["d", "threshold", "flag rate", "mean log HR",
                        "sd log HR"], rows), ""]
    return "\n".join(lines)


def render_figure1(body: dict, fmt: str) -> str:
    if fmt == "doc":
        return _doc(body)
    bands = body.get("bands", [])
    if fmt == "csv":
        band_for = {}
        for band in bands:
            for d in range(band["d_lo"], band["d_hi"] + 1):
                band_for[d] = band
        rows = []
        for point in body["points"]:
            d = int(point["d"])
            band = band_for.get(d)
            rows.append([str(d), repr(point["theta_star"]),
                         repr(band["threshold"]) if band else "",
                         str(band["exceeds_cap"]).lower() if band else ""])
        return _csv_lines(["d", "theta_star_continuous", "threshold_snapped",
                           "exceeds_cap"], rows)
    lines = ["# power-holding threshold by death count", "",
             f"continuous curve: {len(body['points'])} death counts from "
             f"{body['points'][0]['d']:.0f} to {body['points'][-1]['d']:.0f}"]
    if bands:
        rows = [[f"{b['d_lo']}-{b['d_hi']}", f"{b['threshold']:.2f}",
                 (f"{b['alpha_lo']:.3f}-{b['alpha_hi']:.3f}"
                  if b.get("alpha_lo") is not None else ""),
                 f"{b['power_lo']:.3f}-{b['power_hi']:.3f}",
                 "yes" if b["exceeds_cap"] else ""]
                for b in bands]
        lines += ["", _md_table(["deaths", "threshold", "alpha range",
                                 "power range", "exceeds cap"], rows)]
    lines.append("")
    return "\n".join(lines)


def render_bundled(entries: list[dict]) -> str:
    rows = [[e["name"], e["command"], e["description"]] for e in entries]
    return _md_table(["name", "command", "description"], rows) + "\n"


# ---------------------------------------------------------------------------
# command wiring


def _figure_request(config: dict) -> dict:
    """Translate a figure config (or plan config) into a /v1/curve request."""
    if "strategy" in config:
        plan_cfg = config.get("config", {})
        theta1 = plan_cfg.get("theta1")
        beta = plan_cfg.get("beta")
        if isinstance(beta, list):
            beta = beta[0] if beta else None
        if beta is None and "stages" in plan_cfg:
            for stage in plan_cfg["stages"]:
                if "beta" in stage and "theta1" in stage:
                    theta1, beta = stage["theta1"], stage["beta"]
                    break
        if theta1 is None or beta is None:
            raise CliError(
                "figure1 needs a power-anchored stage: the plan config must "
                "chose theta1 and beta somewhere", EXIT_USAGE)
        request = {"theta1": theta1, "beta": beta,
                   "theta0": plan_cfg.get("theta0")}
        for key in ("d_min", "d_max", "grid_start", "grid_step", "alpha_cap",
                    "pi", "include_bands"):
            if key in config:
                request[key] = config[key]
    else:
        request = dict(config)
    request.setdefault("d_min", 40)
    request.setdefault("d_max", 200)
    return {k: v for k, v in request.items() if v is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="choose4",
        description="Pre-specified OS safety monitoring designs: choose any "
                    "admissible 4 of the 6 per-look parameters; the engine "
                    "derives the other 2.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_command(name: str, help_text: str, seed: bool = False):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True,
                         help="JSON config path, or bundled:<name>")
        cmd.add_argument("--format", choices=FORMATS, default="markdown")
        cmd.add_argument("--out", help="write output here instead of stdout "
                                       "(relative paths honor CHOOSE4_OUT_DIR)")
        cmd.add_argument("--server", help="base URL of a running service; "
                                          "default runs in-process")
        if seed:
            cmd.add_argument("--seed", type=int, help="override the config seed")
        return cmd

    add_data_command("solve", "resolve one 4-of-6 analysis")
    add_data_command("plan", "monitoring plan table + joint OCs", seed=True)
    add_data_command("ocs", "joint OCs at chosen true hazard ratios", seed=True)
    add_data_command("simulate", "patient-level Monte Carlo check", seed=True)
    add_data_command("figure1", "threshold-vs-deaths curve with grid snapping")

    bundled = sub.add_parser("bundled", help="list or copy packaged configs")
    bundled.add_argument("--show", metavar="NAME",
                         help="print the named config instead of the listing")
    bundled.add_argument("--out")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--static", help="directory to serve at / "
                                        "(e.g. the built webapp)")
    return parser


def _apply_seed(request: dict, command: str, seed: int | None) -> dict:
    if seed is None:
        return request
    request = dict(request)
    if command == "simulate":
        request["seed"] = seed
    else:
        integration = dict(request.get("integration", {}))
        integration["seed"] = seed
        request["integration"] = integration
    return request


def run_command(args) -> int:
    if args.command == "bundled":
        if args.show:
            write_output(_bundled_text(args.show), args.out)
        else:
            write_output(render_bundled(bundled_configs()), args.out)
        return EXIT_OK

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(static_dir=args.static),
                    host=args.host, port=args.port)
        return EXIT_OK

    config = load_config(args.config)
    client = ApiClient(args.server)
    seed = getattr(args, "seed", None)

    if args.command == "solve":
        body = client.request("POST", "/v1/solve", config)
        text = render_solve(body, args.format)
    elif args.command in ("plan", "ocs"):
        request = _apply_seed(config, args.command, seed)
        body = client.request("POST", "/v1/plan/evaluate", request)
        render = render_plan if args.command == "plan" else render_ocs
        text = render(body, args.format)
    elif args.command == "simulate":
        request = _apply_seed(config, "simulate", seed)
        body = client.request("POST", "/v1/simulate", request)
        text = render_simulate(body, args.format)
    else:  # figure1
        body = client.request("POST", "/v1/curve", _figure_request(config))
        text = render_figure1(body, args.format)
    write_output(text, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep both
        return int(exc.code or 0)
    try:
        return run_command(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except httpx.HTTPError as exc:
        print(f"error[transport]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error[internal]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
