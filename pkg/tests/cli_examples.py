"""Documented CLI invocations shared by the CLI tests and the acceptance suite."""
import json
from pathlib import Path


def write_fixtures(root):
    """Create the covariance and series files the examples refer to."""
    root = Path(root)
    covs = {
        "diag1.json": {"dim": 1, "matrix": [[1.0]]},
        "diag11.json": {"dim": 2, "matrix": [[1.0, 0.0], [0.0, 1.0]]},
        "diag41.json": {"dim": 2, "matrix": [[4.0, 0.0], [0.0, 1.0]]},
        "diag111.json": {"dim": 3, "matrix": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},
        "diag9.json": {"dim": 3, "matrix": [[9.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.25]]},
        "rotated.json": {"dim": 2, "matrix": [[2.5, 1.5], [1.5, 2.5]]},
    }
    for name, obj in covs.items():
        (root / name).write_text(json.dumps(obj))
    epochs = [
        {"t": f"2024-01-01T00:00:{i:02d}Z", "matrix": [[1.0, 0.0], [0.0, 1.0]]} for i in range(10)
    ]
    (root / "series.json").write_text(json.dumps(epochs))
    (root / "malformed.json").write_text('{"dim": 2, "matrix": [[1.0, 0.0], [0.0')
    return root


# (argv with {d} standing for the fixture directory, substring expected on stdout)
EXAMPLES = [
    (["factor", "--dim", "1", "--confidence", "0.95"], "factor 1.95996"),
    (["factor", "--dim", "3", "--confidence", "0.95", "--m", "1", "--n", "1"], "factor 2.79548"),
    (["factor", "--dim", "2", "--confidence", "0.95", "--ratio", "1", "--method", "chisq"], "factor 2.44775"),
    (["factor", "--dim", "2", "--confidence", "95", "--ratio", "0.5"], "factor 2.03586"),
    (["radius", "--cov", "{d}/diag11.json", "--confidence", "0.95"], "radius 2.44775"),
    (["radius", "--cov", "{d}/diag41.json", "--confidence", "0.95", "--method", "diagonal"], "radius 4.38261"),
    (["radius", "--cov", "{d}/diag41.json", "--confidence", "0.95"], "radius 4.07172"),
    (["compare", "--dim", "2", "--ratio", "0", "--confidence", "0.95"], "chi-sq overestimation 24.9%"),
    (["compare", "--dim", "3", "--m", "0", "--n", "0", "--confidence", "0.95"], "chi-sq overestimation 42.6%"),
    (["compare", "--dim", "2", "--ratio", "1", "--confidence", "0.95"], "diagonal overestimation 13.2%"),
    (["compare", "--dim", "3", "--m", "1", "--n", "1", "--confidence", "0.95"], "diagonal overestimation 21.4%"),
    (["compare", "--cov", "{d}/rotated.json", "--confidence", "0.95"], "sigma_x 2"),
    (["table", "--dim", "2", "--confidence", "0.95", "--step", "0.01", "--out", "{d}/t2.csv"], "grid size 101"),
    (["table", "--dim", "3", "--confidence", "0.95", "--step", "0.05", "--out", "{d}/t3.ftbl"], "grid size 231"),
    (["factor", "--dim", "2", "--confidence", "0.95", "--ratio", "0.5", "--table", "{d}/t2.csv"], "factor 2.03586"),
    (["factor", "--dim", "3", "--confidence", "0.95", "--m", "1", "--n", "1", "--table", "{d}/t3.ftbl"],
     "factor 2.79548"),
    (["availability", "--series", "{d}/series.json", "--threshold", "2.5", "--confidence", "0.95"],
     "availability 1.000000"),
    (["availability", "--series", "{d}/series.json", "--threshold", "2.40", "--confidence", "0.95",
      "--method", "chisq"], "availability 0.000000"),
    (["mc-check", "--cov", "{d}/diag1.json", "--confidence", "0.95", "--samples", "1000000", "--seed", "1"], "PASS"),
    (["mc-check", "--cov", "{d}/diag111.json", "--confidence", "0.95", "--samples", "1000000", "--seed", "1"], "PASS"),
    (["mc-check", "--cov", "{d}/diag9.json", "--confidence", "0.95", "--samples", "1000000", "--seed", "1"], "PASS"),
]


def expand(argv, root):
    return [a.replace("{d}", str(root)) for a in argv]
