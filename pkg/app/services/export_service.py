"""
Rendering of states, labels, graphs, traces and verdicts as text, JSON and DOT.
"""
from __future__ import annotations

from typing import Optional

import networkx as nx

from app.models.bisim_model import BisimVerdict, Bisimilar, Distinguished, sorted_barbs
from app.models.cli_model import (
    EdgeExport, LabelExport, LocatedExport, NormalFormExport, RestrictionExport, StateGraphExport,
    StepExport, TraceExport, TypeReportExport, VerdictExport,
)
from app.models.normal_form_model import NormalForm
from app.models.reduction_model import BroadLabel, LocalLabel, RuleLabel, StateGraph, Trace
from app.models.type_model import TypeReport
from app.services.congruence_service import denote
from app.services.parser_service import (
    format_bound, format_message, format_network, format_process, format_type,
)


def format_label(label: RuleLabel) -> str:
    """One-line rendering of a rule label."""
    if isinstance(label, BroadLabel):
        return (f"Broad {label.channel}: {label.sender} -> {{{', '.join(label.receivers)}}} "
                f"<{format_message(label.message)}>")
    if isinstance(label, LocalLabel):
        return f"Local {label.channel} @ {label.location} <{format_message(label.message)}>"
    return (f"Coll {label.channel}: {{{', '.join(label.senders)}}} -> {label.receiver} "
            f"{format_message(label.messages)}")


def format_state(nf: NormalForm) -> str:
    """A normal form printed as the network it denotes."""
    return format_network(denote(nf))


def label_export(label: RuleLabel) -> LabelExport:
    """JSON model of a label."""
    if isinstance(label, BroadLabel):
        location, peers, message = label.sender, list(label.receivers), label.message
    elif isinstance(label, LocalLabel):
        location, peers, message = label.location, [], label.message
    else:
        location, peers, message = label.receiver, list(label.senders), label.messages
    return LabelExport(rule=label.rule, channel=label.channel, location=location, peers=peers,
                       message=format_message(message), text=format_label(label))


def normal_form_export(nf: NormalForm) -> NormalFormExport:
    """JSON model of a normal form."""
    return NormalFormExport(
        restrictions=[RestrictionExport(name=item.name, bound=format_bound(item.bound),
                                        type=format_type(item.type_ann)
                                        if item.type_ann is not None else None)
                      for item in nf.restrictions],
        connectivity=[[source, target] for source, target in sorted(nf.connectivity)],
        located=[LocatedExport(location=location, process=format_process(proc))
                 for location, proc in nf.located],
        text=format_state(nf),
    )


def state_graph_export(graph: StateGraph) -> StateGraphExport:
    """JSON model of a state graph."""
    return StateGraphExport(
        initial=graph.initial,
        mode=graph.mode.value,
        truncated=graph.truncated,
        limits={"max_states": graph.limits.max_states,
                "unfold_budget": graph.limits.unfold_budget,
                "max_steps": graph.limits.max_steps},
        states=[normal_form_export(state) for state in graph.states],
        edges=[EdgeExport(source=source, target=target, label=label_export(label))
               for source, label, target in graph.edges],
    )


def trace_export(trace: Trace) -> TraceExport:
    """JSON model of a run."""
    return TraceExport(
        seed=trace.seed, stuck=trace.stuck, initial=normal_form_export(trace.initial),
        steps=[StepExport(label=label_export(label), state=normal_form_export(state))
               for label, state in trace.steps],
    )


def verdict_export(verdict: BisimVerdict, barb_mode: str) -> VerdictExport:
    """JSON model of a bisimulation verdict."""
    if isinstance(verdict, Bisimilar):
        return VerdictExport(verdict="Bisimilar", barb_mode=barb_mode,
                             witness_size=len(verdict.witness))
    if isinstance(verdict, Distinguished):
        steps = [StepExport(label=label_export(label), state=normal_form_export(state))
                 for label, state in zip(verdict.labels, verdict.states[1:])]
        return VerdictExport(verdict="Distinguished", barb_mode=barb_mode,
                             reason=verdict.reason, side=verdict.side,
                             unmatched_barbs=[str(barb)
                                              for barb in sorted_barbs(verdict.unmatched)],
                             initial=normal_form_export(verdict.states[0]), trace=steps)
    return VerdictExport(verdict="Inconclusive", barb_mode=barb_mode, reason=verdict.reason)


def type_report_export(report: TypeReport) -> TypeReportExport:
    """JSON model of a type report."""
    return TypeReportExport(ok=report.ok, error=report.network_error,
                            agent_errors=dict(sorted(report.agent_errors.items())),
                            unchecked_agents=sorted(report.unchecked_agents))


def _quoted(text: str) -> str:
    # pydot ids holding ":" must arrive already quoted
    return '"' + text.replace('"', '\\"') + '"'


def state_graph_dot(graph: StateGraph, name: Optional[str] = "states") -> str:
    """DOT rendering of a state graph; the initial state is drawn doubled."""
    digraph = nx.MultiDiGraph(name=name)
    for index, state in enumerate(graph.states):
        attributes = {"label": _quoted(f"{index}: {format_state(state)}"), "shape": "box"}
        if index == graph.initial:
            attributes["peripheries"] = "2"
        digraph.add_node(index, **attributes)
    for source, label, target in graph.edges:
        digraph.add_edge(source, target, label=_quoted(format_label(label)))
    return nx.nx_pydot.to_pydot(digraph).to_string()
