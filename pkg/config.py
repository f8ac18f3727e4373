VERSION = "1.0.0"

TOLERANCES = {
    "residual": 1e-10,
    "reality": 1e-6,
    "pole": 1e-8,
    "classification": 1e-9,
    "quadrature": 1e-10,
    "eigen": 1e-10,
}

SOLVER_SETTINGS = {
    "continuation_steps": 12,
    "initial_time": 0.05,
    "max_newton_iterations": 60,
    "min_damping": 1.0 / 1024,
    "derivative_step": 1e-7,
    "max_step_halvings": 8,
    "degenerate_epsilon": 1e-6,
    "on_cut_offset": 1e-9,
    "theta_series_tolerance": 1e-17,
    "quadrature_limit": 2000,
    "shooting_tolerance": 1e-13,
    "n_jobs": 1,
}

# xi = -1, xf = 1, T = 3 double-well atlas.
FIGURE_DEFAULTS = {
    "xi": -1.0,
    "xf": 1.0,
    "T": 3.0,
    "time": "real",
    "n": 1,
    "m": 0,
    "nmax": 6,
    "mmax": 6,
    "hbar": 1.0,
    "theta": 0.0,
    "phi": None,
    "w_max": None,
    "system": "free",
    "samples": 201,
    "grid_n": 256,
    "format": "json",
    "out": "-",
}

FLOW_SETTINGS = {
    # highest lattice mode grows like 4 N^2 / T^2 along the flow
    "grid_n": 64,
    "du": 1e-4,
    "steps": 100,
    "stokes_phase": 1e-3,
    "instability_tolerance": 1e-10,
    "divergence_cap": 1e6,
}

KERNEL_SETTINGS = {
    "caustic_window": 1e-6,
    "winding_tail_bound": 1e-12,
    "max_windings": 10_000,
    "real_time_windings": 50,
}

ASYMPTOTIC_THRESHOLDS = {
    "instanton_min_T": 5.0,
    "sphaleron_min_T_per_label": 4.0,
    "short_time_max_T": 0.5,
    "scan_ratio_low": 0.25,
    "scan_ratio_high": 0.35,
    "scan_label_gaps": (1, 2),
}

OUTPUT_SETTINGS = {
    "schema_version": 1,
    "csv_float_format": "%.17g",
}

ASYMPTOTIC_REPORT_CASES = {
    "short_time_T": 0.1,
    "short_time_labels": ((1, 0), (2, 1), (3, 2)),
    "instanton_T": 10.0,
    "instanton_labels": ((0, 0), (1, 0)),
    "sphaleron_cases": ((1, 10.0), (2, 15.0)),
    # (label, T, p, action) of large-T oscillating saddles
    "oscillatory_cases": (
        ((31, 30), 100.0, 0.427 + 0.155j, -1.072 + 0.007j),
        ((52, 50), 172.0, 0.528 + 0.185j, -2.892 + 0.092j),
    ),
}
