"""Writes fixtures/desk1.json, the canonical desk scenario, in the same
canonical layout the library serializer produces."""
import json
import pathlib


def grid(lo, hi, n, digits):
    step = (hi - lo) / (n - 1)
    return [round(lo + step * i, digits) for i in range(n)]


def curve(xs, f, digits=10):
    return {"xs": xs, "ys": [round(f(x), digits) for x in xs], "interpolation": "cubic"}


dc = grid(0.10, 0.90, 17, 2)
rbb = grid(0.04, 0.14, 11, 3)
rf = grid(0.05, 0.15, 11, 3)
s_grid = [float(x) for x in range(6_000_000, 14_000_001, 500_000)]
p_grid = [float(x) for x in range(4_000_000, 12_000_001, 500_000)]

scenario = {
    "schema_version": "1",
    "meta": {
        "name": "DESK-1",
        "lifecycle_stage": "stage one: the decision to lease",
        "notes": "Reference desk deal: $10M store portfolio, 10-year leaseback versus an $8M amortizing loan.",
    },
    "deal": {
        "sale_price": 10000000.0,
        "loan_principal": 8000000.0,
        "monthly_rent": 70000.0,
        "term_months": 120,
        "implicit_lease_rate": 0.07,
        "borrow_cost_before": 0.085,
        "borrow_cost_after": 0.08,
        "firm_borrow_cost": 0.09,
        "tax_rate_seller_lessee": 0.35,
        "tax_rate_buyer_lessor": 0.3,
        "txn_cost_slb": 0.02,
        "txn_cost_loan": 0.01,
        "leverage_benefit": 150000.0,
        "leverage_penalty_rate": 0.02,
        "debt_to_capital": 0.45,
        "total_capital": 50000000.0,
        "terminal_value_pv": 2500000.0,
        "p_bankrupt_slb": 0.03,
        "p_bankrupt_borrow": 0.05,
        "p_lessor_bankrupt_slb": 0.01,
        "p_lessor_bankrupt_borrow": 0.01,
        "p_taxable_income": 0.8,
        "classification": "capital",
    },
    "curves": {
        "P_dss_of_DC": curve(dc, lambda x: 0.01 + 0.05 * x**3),
        "P_dss_of_Rbb": curve(rbb, lambda x: 0.005 + 0.4 * (x - 0.04) ** 2 + 3.0 * (x - 0.04) ** 3),
        "P_dss_of_Rf": curve(rf, lambda x: 0.005 + 0.5 * (x - 0.05) ** 2 + 40.0 * (x - 0.05) ** 3),
        "R_ba_of_DC": curve(dc, lambda x: 0.045 + 0.035 * x + 0.08 * x**3),
        "R_bb_of_DC": curve(dc, lambda x: 0.05 + 0.04 * x + 0.6 * x**3),
        "R_dlev_of_DC": curve(dc, lambda x: 0.01 + 0.03 * x**2),
        "R_f_of_DC": curve(dc, lambda x: 0.055 + 0.05 * x + 0.12 * x**2),
        "R_f_of_P": curve(p_grid, lambda x: 0.09 + 2e-9 * (x - 8e6)),
        "R_s_of_S": curve(s_grid, lambda x: 0.07 - 1e-9 * (x - 1e7)),
        "r_a_of_DC": curve(dc, lambda x: 0.002 + 0.01 * x),
    },
    "options": {"mode": "verbatim", "solver_tolerance": 1e-06, "solver_max_iterations": 200},
}

text = json.dumps(scenario, indent=2, ensure_ascii=False).replace("1e-06", "1e-6") + "\n"
out = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "desk1.json"
out.write_text(text)
print(f"wrote {out}")
