"""Graphviz DOT renderings of automata and weighted pair graphs."""


def _quote(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def automaton_to_dot(a, name="automaton"):
    """Initial states get an entry arrow, final states a double circle; parallel edges are merged."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    for s in a.states:
        shape = "doublecircle" if s in a.final else "circle"
        lines.append(f"  {_quote(s)} [shape={shape}];")
    for s in a.sort_states(a.initial):
        entry = _quote(f"__start_{s}")
        lines.append(f"  {entry} [shape=point, style=invis];")
        lines.append(f"  {entry} -> {_quote(s)};")
    labels = {}
    for p, symbol, q in a.transitions:
        labels.setdefault((p, q), []).append(symbol)
    for (p, q), symbols in labels.items():
        lines.append(f"  {_quote(p)} -> {_quote(q)} [label={_quote(','.join(symbols))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pair_graph_to_dot(g, name="pair_graph"):
    """Vertices are labelled p,q; recurrent classes are boxed, stochastic ones filled."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    ids = {v: f"v{i}" for i, v in enumerate(g.vertices)}
    for i, cls in enumerate(g.classes):
        if cls.recurrent:
            lines.append(f"  subgraph cluster_{i} {{")
            lines.append(f"    label={_quote('stochastic' if cls.stochastic else 'substochastic')};")
            style = ", style=filled, fillcolor=lightgrey" if cls.stochastic else ""
            for v in cls.vertices:
                lines.append(f"    {ids[v]} [label={_quote(f'{v[0]},{v[1]}')}{style}];")
            lines.append("  }")
        else:
            for v in cls.vertices:
                lines.append(f"  {ids[v]} [label={_quote(f'{v[0]},{v[1]}')}];")
    for v in g.initial:
        lines.append(f"  {ids[v]} [peripheries=2];")
    for v in g.vertices:
        for succ, weight in g.successors(v).items():
            lines.append(f"  {ids[v]} -> {ids[succ]} [label={_quote(weight)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
