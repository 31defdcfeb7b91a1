"""Build the synthetic evaluation set under crates/core/data/synthetic.

30 production-planning instances with ground truth, and a matching set of
generated results. Instances 0-2 get a wrong objective coefficient, and
instance 3 has its logic constraint classified and formulated as a lower
bound, so its linking constraints are missing. All other results are
correct, some written in scaled or reordered form.
"""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/synthetic"

GOODS = [
    ("chairs", "tables", "desks", "workshop"),
    ("bikes", "scooters", "skateboards", "factory"),
    ("cakes", "pies", "tarts", "bakery"),
    ("lamps", "fans", "heaters", "plant"),
    ("shirts", "jackets", "hats", "tailor"),
    ("kayaks", "canoes", "rafts", "boatyard"),
    ("vases", "bowls", "plates", "pottery"),
    ("drills", "saws", "sanders", "toolmaker"),
    ("sofas", "beds", "shelves", "carpenter"),
    ("radios", "speakers", "headsets", "electronics firm"),
]

LOGIC = [
    (10, "If {b} are made, then {a} must also be made.", "bi_{b} <= bi_{a}"),
    (12, "At least one of {a} or {b} must be made.", "bi_{a} + bi_{b} >= 1"),
    (13, "The {owner} can make {a} or {b}, but not both.", "bi_{a} + bi_{b} <= 1"),
]


def instance(k):
    a, b, c, owner = GOODS[k % len(GOODS)]
    p = [3 + k % 5, 5 + k % 7, 4 + k % 3]
    w = [2 + k % 3, 3 + k % 4, 1 + k % 2]
    hours = 400 + 10 * k
    low = 5 + k % 6
    cap = 20 + k
    ltype, ltext, lexpr = LOGIC[k % 3]
    paragraphs = [
        f"A {owner} makes {a}, {b} and {c}. The profit is ${p[0]} for each of the {a}, "
        f"${p[1]} for each of the {b} and ${p[2]} for each of the {c}. "
        f"How many of each should be made to maximize the total profit?",
        f"There are {hours} hours of labour available. Making one of the {a} takes {w[0]} hours, "
        f"one of the {b} {w[1]} hours and one of the {c} {w[2]} hours.",
        f"At least {low} {a} must be made.",
        f"The number of {c} made cannot exceed the number of {b} made.",
        ltext.format(a=a, b=b, owner=owner),
        f"No more than {cap} {c} can be made.",
    ]
    objective = f"Maximize {p[0]}*{a} + {p[1]}*{b} + {p[2]}*{c}"
    rows = [
        (3, f"{w[0]}*{a} + {w[1]}*{b} + {w[2]}*{c} <= {hours}"),
        (5, f"{a} >= {low}"),
        (9, f"{c} <= {b}"),
        (ltype, lexpr.format(a=a, b=b)),
        (1, f"{c} <= {cap}"),
    ]
    if k >= 27:
        paragraphs.pop()
        rows.pop()
    names = [a, b, c]
    used = [a, b]
    if k == 3:
        a, b = "orders_a", "orders_b"
        names = ["orders_a", "orders_b", "orders_c"]
        used = names[:2]
        paragraphs = [
            "A store buys chairs from manufacturers A, B and C. Each order from A saves $4, "
            "each order from B $6 and each order from C $5. How many orders should be placed "
            "with each manufacturer to maximize the savings?",
            "There are 430 minutes of handling time available. An order from A takes 3 minutes, "
            "from B 2 minutes and from C 4 minutes.",
            "At least 6 orders must be placed with manufacturer C.",
            "The number of orders placed with A cannot exceed the number placed with C.",
            "If the store decides to order chairs from manufacturer A, they must also order "
            "at least 10 chairs from manufacturer B.",
            "No more than 40 orders can be placed with manufacturer B.",
        ]
        objective = "Maximize 4*orders_a + 6*orders_b + 5*orders_c"
        rows = [
            (3, "3*orders_a + 2*orders_b + 4*orders_c <= 430"),
            (5, "orders_c >= 6"),
            (9, "orders_a <= orders_c"),
            (10, "bi_orders_a <= bi_orders_b"),
            (1, "orders_b <= 40"),
        ]
    variables = [{"name": n, "kind": "integer"} for n in names]
    variables += [{"name": f"bi_{n}", "kind": "binary", "linked_base": n} for n in used]
    constraints = [
        {"expr": e, "ctype": t, "source": i + 1} for i, (t, e) in enumerate(rows)
    ]
    links = []
    for n in used:
        links.append({"expr": f"{n} <= 100000*bi_{n}", "ctype": "linking", "source": "supplemented"})
        links.append({"expr": f"bi_{n} <= {n}", "ctype": "linking", "source": "supplemented"})
    truth = {
        "id": f"synthetic_{k:02}",
        "paragraphs": paragraphs,
        "ground_truth": {
            "variables": variables,
            "objective": objective,
            "constraints": constraints + links,
            "big_m": 100000,
        },
        "sufficient_big_m": 1000,
    }
    return truth


def scaled(expr, factor):
    """`lhs op rhs` with every number and bare name multiplied by factor."""
    out = []
    for tok in expr.split(" "):
        if tok in ("+", "-", "<=", ">=", "="):
            out.append(tok)
        elif "*" in tok:
            coef, name = tok.split("*")
            out.append(f"{int(coef) * factor}*{name}")
        elif tok.isdigit():
            out.append(str(int(tok) * factor))
        else:
            out.append(f"{factor}*{tok}")
    return " ".join(out)


def generated(k, truth):
    gt = truth["ground_truth"]
    paragraphs = [{"code": 0, "expression": gt["objective"]}]
    model_constraints = []
    for c in gt["constraints"]:
        if c["ctype"] == "linking":
            continue
        expr = c["expr"]
        if k % 4 == 1 and c["ctype"] == 3:
            expr = scaled(expr, 2)
        paragraphs.append({"code": c["ctype"], "expression": expr})
        model_constraints.append({"expr": expr, "ctype": c["ctype"], "source": c["source"]})
    objective = gt["objective"]
    if k < 3:
        # Selling price used where the profit margin was meant.
        head, rest = objective.split("*", 1)
        objective = f"{head[:-1]}{int(head.split()[-1]) + 4}*{rest}"
        paragraphs[0]["expression"] = objective
    variables = list(gt["variables"])
    links = [c for c in gt["constraints"] if c["ctype"] == "linking"]
    if k == 3:
        paragraphs[4] = {"code": 5, "expression": "orders_b >= 10"}
        model_constraints[3] = {"expr": "orders_b >= 10", "ctype": 5, "source": 4}
        variables = [v for v in variables if v["kind"] != "binary"]
        links = []
    if k % 5 == 2:
        links = [dict(l, expr=l["expr"].replace("100000*", "5000*")) for l in links]
    return {
        "id": truth["id"],
        "paragraphs": paragraphs,
        "model": {
            "variables": variables,
            "objective": objective,
            "constraints": model_constraints + links,
            "big_m": 100000,
        },
    }


def main():
    truths = [instance(k) for k in range(30)]
    results = [generated(k, t) for k, t in enumerate(truths)]
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "truth.json").write_text(json.dumps(truths, indent=2) + "\n")
    (OUT / "generated.json").write_text(json.dumps(results, indent=2) + "\n")


if __name__ == "__main__":
    main()
