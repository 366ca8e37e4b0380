"""Narrative walkthrough of the library API on the bundled sample network.

Runs the whole chain by hand - detection, path mapping, enrichment, risk
scoring, planning, review, sourcing - printing each stage's output, then
shows the evaluation harness scoring a run against a labelled scenario.

    python demos/walkthrough.py
"""

from importlib import resources
from pathlib import Path

from chainwatch import (
    Verdict,
    assess,
    decide,
    disrupted_paths,
    enrich_paths,
    extract_report,
    find_alternatives,
    load_graph,
    render_plan,
    review,
    validate_candidate,
)
from chainwatch.enrichment import load_catalog
from chainwatch.extraction import load_gazetteer, load_type_lexicon, rule_backend
from chainwatch.pipeline import build_criteria
from chainwatch.sourcing import load_alternatives_catalog

DATA = resources.files("chainwatch").joinpath("data")


def main():
    graph = load_graph(str(DATA / "mini_mb.json"))
    article = Path(str(DATA / "case_study_article.txt")).read_text(encoding="utf-8")
    backend = rule_backend(
        load_gazetteer(str(DATA / "gazetteer.json")),
        load_type_lexicon(str(DATA / "type_lexicon.json")),
    )

    print("=== stage 1: disruption detection ===")
    report = extract_report(article, "Mercedes-Benz Group AG", backend)
    print(f"type: {report.disruption_type.value}")
    print(f"countries: {report.countries}")
    print(f"industries: {report.industries}")
    print(f"companies: {report.companies}")

    print("\n=== stage 2: disrupted paths ===")
    criteria = build_criteria(report, graph)
    paths = disrupted_paths(graph, "mercedes-benz-group-ag", criteria)
    for p in paths:
        chain = " <- ".join(n.company for n in p.nodes)
        print(f"tier {p.disrupted_tier}: {chain}")

    print("\n=== stage 3: product enrichment ===")
    catalog = load_catalog(str(DATA / "product_catalog.json"))
    enriched = enrich_paths(paths, catalog)
    for p in enriched:
        print(f"tier {p.disrupted_tier}: products {p.products}")

    print("\n=== stage 5: risk assessment ===")
    assessment = assess(graph, "mercedes-benz-group-ag", enriched)
    for s in assessment.suppliers:
        print(f"{s.supplier}: score {s.score:.6f} ({s.level.value})")

    print("\n=== stage 6: action plan + review gate ===")
    plan = decide(assessment, report)
    plan = review(plan, Verdict.approve(), reviewer="walkthrough")
    print(render_plan(plan))

    print("=== stage 7: alternative sourcing ===")
    alternatives = load_alternatives_catalog(str(DATA / "alternatives_catalog.json"))
    candidates = find_alternatives(
        "Catalysts, Precious Metal Products", "johnson-matthey-plc", alternatives, graph
    )
    for candidate in candidates:
        validated = validate_candidate(graph, candidate, criteria)
        print(f"{validated.name} ({validated.country}, {validated.industry}): "
              f"{validated.validation.value}")

    print("\n=== evaluation: a scenario scored against gold ===")
    from chainwatch.evaluation import evaluate_run, load_scenario
    from chainwatch.pipeline import PipelineConfig, run_pipeline

    orion = load_graph(str(DATA / "orion_ev.json"))
    scenario = load_scenario(str(DATA / "scenarios" / "s06-andes-export-restrictions.json"))
    config = PipelineConfig(
        extraction_backend=backend,
        product_catalog=catalog,
        sourcing_backend=alternatives,
        auto_approve=True,
    )
    record = run_pipeline(scenario.article, scenario.focal, orion, config)
    evaluation = evaluate_run(record, scenario, orion)
    for stage, metrics in evaluation.stage_metrics().items():
        print(f"{stage}: P={metrics.precision:.3f} R={metrics.recall:.3f} F1={metrics.f1:.3f}")


if __name__ == "__main__":
    main()
