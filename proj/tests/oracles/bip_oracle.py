#!/usr/bin/env python3
"""Naive reachable-state enumeration for the BIP text format.

Transcribes the composed-component relation: a connector fires when every
endpoint has a guard-true transition on its port; all combinations are
enumerated; interactions whose connector is dominated by an enabled
higher-priority connector are dropped. The sender's bound value (sampled in
the source state) is copied to the receivers' bound variables before the
updates run. Range violations lead to one shared ERROR node.
Prints {"nodes": N, "edges": E}.
"""
import itertools
import json
import sys

from exprlang import Cursor, parse_assignments, parse_expr, parse_var, tokenize


def parse(text):
    cur = Cursor(tokenize(text))
    cur.expect_id("bip")
    cur.expect_id()
    cur.expect_op("{")
    atomics, connectors, prio = {}, [], set()
    order = []
    while not cur.is_op("}"):
        kw = cur.expect_id()
        if kw == "atomic":
            name = cur.expect_id()
            order.append(name)
            cur.expect_op("{")
            a = {"vars": [], "ports": {}, "init": None, "trans": []}
            while not cur.is_op("}"):
                k = cur.expect_id()
                if k == "var":
                    a["vars"].append(parse_var(cur))
                elif k == "port":
                    p = cur.expect_id()
                    b = None
                    if cur.is_id("binds"):
                        cur.next()
                        b = cur.expect_id()
                    cur.expect_op(";")
                    a["ports"][p] = b
                elif k == "location":
                    loc = cur.expect_id()
                    if cur.is_id("init"):
                        cur.next()
                        a["init"] = loc
                    cur.expect_op(";")
                elif k == "on":
                    port = cur.expect_id()
                    cur.expect_id("from")
                    src = cur.expect_id()
                    cur.expect_id("to")
                    tgt = cur.expect_id()
                    guard = lambda env: 1
                    upd = []
                    if cur.is_id("when"):
                        cur.next()
                        guard = parse_expr(cur)
                    if cur.is_id("do"):
                        cur.next()
                        cur.expect_op("{")
                        upd = parse_assignments(cur)
                        cur.expect_op("}")
                    cur.expect_op(";")
                    a["trans"].append((port, src, tgt, guard, upd))
            cur.expect_op("}")
            atomics[name] = a
        elif kw == "connector":
            name = cur.expect_id()
            cur.expect_op(":")
            ends = [endpoint(cur)]
            cur.expect_op("->")
            if not cur.is_op(";"):
                ends.append(endpoint(cur))
                while cur.accept_op(","):
                    ends.append(endpoint(cur))
            cur.expect_op(";")
            connectors.append((name, ends))
        elif kw == "priority":
            chain = [cur.expect_id()]
            while cur.accept_op("<"):
                chain.append(cur.expect_id())
            cur.expect_op(";")
            for lo, hi in zip(chain, chain[1:]):
                prio.add((lo, hi))
        else:
            raise SyntaxError(kw)
    cur.expect_op("}")
    changed = True
    while changed:
        changed = False
        for (a, b) in list(prio):
            for (c, d) in list(prio):
                if b == c and (a, d) not in prio:
                    prio.add((a, d))
                    changed = True
    return order, atomics, connectors, prio


def endpoint(cur):
    name = cur.expect_id()
    if "." in name:  # tokenizer keeps dotted names together
        comp, port = name.split(".", 1)
        return comp, port
    raise SyntaxError("expected COMPONENT.PORT")


def explore(model):
    order, atomics, connectors, prio = model
    s0 = tuple((atomics[n]["init"], tuple(v[3] for v in atomics[n]["vars"])) for n in order)
    pos = {n: i for i, n in enumerate(order)}

    def env_of(state, comp):
        a = atomics[comp]
        return {v[0]: val for v, val in zip(a["vars"], state[pos[comp]][1])}

    def interactions(state):
        found = []
        for cname, ends in connectors:
            choices = []
            for comp, port in ends:
                loc, _ = state[pos[comp]]
                env = env_of(state, comp)
                choices.append([t for t in atomics[comp]["trans"] if t[0] == port and t[1] == loc and t[3](env)])
            if all(choices):
                for combo in itertools.product(*choices):
                    found.append((cname, ends, combo))
        live = {f[0] for f in found}
        return [f for f in found if not any((f[0], d) in prio for d in live)]

    def fire(state, ends, combo):
        new = list(state)
        scomp, sport = ends[0]
        sbind = atomics[scomp]["ports"][sport]
        value = env_of(state, scomp)[sbind] if sbind else None
        for (comp, port), t in zip(ends, combo):
            a = atomics[comp]
            env = env_of(state, comp)
            ranges = {v[0]: (v[1], v[2]) for v in a["vars"]}
            bind = a["ports"][port]
            if comp != scomp and bind and value is not None:
                lo, hi = ranges[bind]
                if not lo <= value <= hi:
                    return "ERROR"
                env[bind] = value
            for target, expr in t[4]:
                val = expr(env)
                lo, hi = ranges[target]
                if not lo <= val <= hi:
                    return "ERROR"
                env[target] = val
            new[pos[comp]] = (t[2], tuple(env[v[0]] for v in a["vars"]))
        return tuple(new)

    seen = {s0}
    todo = [s0]
    edges = 0
    while todo:
        s = todo.pop()
        if s == "ERROR":
            continue
        for _, ends, combo in interactions(s):
            edges += 1
            d = fire(s, ends, combo)
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return {"nodes": len(seen), "edges": edges}


def main():
    for path in sys.argv[1:]:
        with open(path) as fh:
            print(json.dumps(explore(parse(fh.read())), sort_keys=True))


if __name__ == "__main__":
    main()
