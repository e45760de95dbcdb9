#!/usr/bin/env python3
"""Brute-force reachable configurations of a non-extended SFC.

Each micro-step predicate (executeAction, stepTransition, activateAction) is
transcribed directly over sets. Range violations lead to one shared ERROR node.
Prints {"nodes": N, "edges": E} for the chosen mode (ordered by default).
Mode "cycle" iterates whole macro-cycles instead and also reports the largest
value each variable takes.
"""
import json
import sys

from exprlang import Cursor, parse_assignments, parse_expr, parse_var, tokenize


def parse(text):
    cur = Cursor(tokenize(text))
    cur.expect_id("sfc")
    cur.expect_id()
    cur.expect_op("{")
    m = {"vars": [], "actions": {}, "steps": {}, "init": set(), "trans": {}, "order": [], "prio": set()}
    while not cur.is_op("}"):
        kw = cur.expect_id()
        if kw == "var":
            m["vars"].append(parse_var(cur))
        elif kw == "action":
            name = cur.expect_id()
            cur.expect_op("{")
            m["actions"][name] = parse_assignments(cur)
            cur.expect_op("}")
        elif kw == "step":
            name = cur.expect_id()
            if cur.is_id("init"):
                cur.next()
                m["init"].add(name)
            cur.expect_op("{")
            acts = set()
            while not cur.is_op("}"):
                acts.add(cur.expect_id())
                if cur.accept_op("@"):
                    cur.expect_id()
                cur.expect_op(";")
            cur.expect_op("}")
            m["steps"][name] = acts
        elif kw == "transition":
            name = cur.expect_id()
            cur.expect_op(":")
            src = steplist(cur)
            cur.expect_op("->")
            tgt = steplist(cur)
            cur.expect_id("when")
            guard = parse_expr(cur)
            cur.expect_op(";")
            m["trans"][name] = (src, guard, tgt)
        elif kw == "order":
            m["order"].append(cur.expect_id())
            while cur.accept_op("<"):
                m["order"].append(cur.expect_id())
            cur.expect_op(";")
        elif kw == "priority":
            chain = [cur.expect_id()]
            while cur.accept_op(">"):
                chain.append(cur.expect_id())
            cur.expect_op(";")
            for hi, lo in zip(chain, chain[1:]):
                m["prio"].add((lo, hi))
        else:
            raise SyntaxError(kw)
    # transitive closure of ≺
    changed = True
    while changed:
        changed = False
        for (a, b) in list(m["prio"]):
            for (c, d) in list(m["prio"]):
                if b == c and (a, d) not in m["prio"]:
                    m["prio"].add((a, d))
                    changed = True
    return m


def steplist(cur):
    if cur.accept_op("("):
        out = {cur.expect_id()}
        while cur.accept_op(","):
            out.add(cur.expect_id())
        cur.expect_op(")")
        return frozenset(out)
    return frozenset({cur.expect_id()})


def run_action(m, body, f):
    env = dict(f)
    ranges = {v[0]: (v[1], v[2]) for v in m["vars"]}
    for target, expr in body:
        val = expr(env)
        lo, hi = ranges[target]
        if val < lo or val > hi:
            return None
        env[target] = val
    return frozenset(env.items())


def successors(m, c, mode, priority):
    f, active_s, active_a = c
    env = dict(f)
    out = []
    # executeAction
    cands = sorted(active_a, key=m["order"].index)
    if mode == "ordered":
        cands = cands[:1]
    for a in cands:
        nf = run_action(m, m["actions"][a], env)
        out.append(("exec", a, "ERROR" if nf is None else (nf, active_s, active_a - {a})))
    # stepTransition
    enabled = {t for t, (src, g, tgt) in m["trans"].items() if src <= active_s and g(env)}
    for t in enabled:
        src, g, tgt = m["trans"][t]
        if priority and any((t, u) in m["prio"] and m["trans"][u][0] & src for u in enabled if u != t):
            continue
        out.append(("trans", t, (f, (active_s - src) | tgt, active_a)))
    # activateAction
    for s in active_s:
        for a in m["steps"][s]:
            if a not in active_a:
                out.append(("act", (s, a), (f, active_s, active_a | {a})))
    return out


def explore(m, mode="ordered", priority=True):
    c0 = (frozenset((v[0], v[3]) for v in m["vars"]), frozenset(m["init"]), frozenset())
    seen = {c0}
    todo = [c0]
    edges = 0
    while todo:
        c = todo.pop()
        if c == "ERROR":
            continue
        for _, _, d in successors(m, c, mode, priority):
            edges += 1
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return {"nodes": len(seen), "edges": edges}


def cycle(m, c, priority=True):
    f, active_s, active_a = c
    env = dict(f)
    for a in sorted(active_a, key=m["order"].index):
        nf = run_action(m, m["actions"][a], env)
        if nf is None:
            return "ERROR"
        env = dict(nf)
    enabled = {t for t, (src, g, tgt) in m["trans"].items() if src <= active_s and g(env)}
    taken = set()
    for t in enabled:
        src = m["trans"][t][0]
        rivals = [u for u in enabled if u != t and m["trans"][u][0] & src]
        if all(priority and (u, t) in m["prio"] for u in rivals):
            taken.add(t)
    steps = set(active_s)
    for t in taken:
        steps -= m["trans"][t][0]
    for t in taken:
        steps |= m["trans"][t][2]
    acts = set()
    for s in steps:
        acts |= m["steps"][s]
    return (frozenset(env.items()), frozenset(steps), frozenset(acts))


def explore_cycles(m, priority=True):
    c0 = (frozenset((v[0], v[3]) for v in m["vars"]), frozenset(m["init"]), frozenset())
    seen = {c0}
    todo = [c0]
    edges = 0
    while todo:
        c = todo.pop()
        if c == "ERROR":
            continue
        d = cycle(m, c, priority)
        edges += 1
        if d not in seen:
            seen.add(d)
            todo.append(d)
    top = {}
    for c in seen:
        if c != "ERROR":
            for k, v in c[0]:
                top[k] = max(top.get(k, v), v)
    return {"nodes": len(seen), "edges": edges, "max": top}


def main():
    args = sys.argv[1:]
    mode = "ordered"
    if args and args[0].startswith("--mode="):
        mode = args.pop(0).split("=", 1)[1]
    for path in args:
        with open(path) as fh:
            m = parse(fh.read())
            res = explore_cycles(m) if mode == "cycle" else explore(m, mode)
        print(json.dumps(res, sort_keys=True))


if __name__ == "__main__":
    main()
