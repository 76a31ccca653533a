import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfxplain.classify import TrainedClassifier
from cfxplain.corpus import SECTORS, Sector, Transaction
from cfxplain.explain import (
    NO_TERMS, EnterpriseRecord, Explanation, SectorLexicon, SurrogateError, build_sector_lexicon,
    enrich_explanation, explain_transaction, five_way_report, fit_local_surrogate, jaccard_similarity,
    kernel_weights, load_annotations, load_enterprises, load_lexicon, match_enterprises, perturb_and_weight,
    proximity_similarity, render_template, sector_confusion, select_enterprise_terms, select_terms,
    transaction_seed, validate_explanation,
)
from cfxplain.features import fit_vocabulary, transform_masked
from cfxplain.textprep import ProcessedDoc, default_config, preprocess

from oracles import all_masks, lev_ratio, weighted_ridge

CFG = default_config()
ENTERPRISES = load_enterprises()
LEXICON = load_lexicon()


def D(*lemmas):
    return ProcessedDoc(tuple(lemmas))


def one_token_model(vocab_doc, token, target=Sector.GAS_STATIONS, slope=1.0):
    """Linear model whose target score is ``slope * count(token)``."""
    space = fit_vocabulary([vocab_doc])
    W = np.zeros((8, space.dim))
    W[target.index, space.column(token)] = slope
    return TrainedClassifier("svc", space, {}, 0, W=W, b=np.zeros(8))


# perturbation and kernel

def test_three_token_doc_is_exhaustive():
    masks, w = perturb_and_weight(D("a", "b", "c"), seed=1)
    assert masks.shape == (8, 3)
    assert sorted(map(tuple, masks.astype(int).tolist())) == sorted(map(tuple, all_masks(3)))


def test_kernel_values():
    w = kernel_weights(np.array([[1, 1, 1, 1], [0, 0, 0, 0], [1, 1, 0, 0]], dtype=bool))
    assert w[0] == 1.0
    assert w[1] == pytest.approx(math.exp(-1 / 0.0625)) and w[1] == pytest.approx(1.1e-7, rel=0.03)
    assert w[2] == pytest.approx(math.exp(-0.25 / 0.0625))


def test_empty_doc_has_nothing_to_explain():
    with pytest.raises(SurrogateError, match="nothing to explain"):
        perturb_and_weight(D())


def test_sampled_masks_include_all_ones_and_repeated_tokens_group():
    doc = D(*[f"t{i}" for i in range(12)], "t0")
    masks, w = perturb_and_weight(doc, n_samples=300, seed=4)
    assert masks.shape == (300, 12)
    assert masks[0].all() and w[0] == 1.0
    again, _ = perturb_and_weight(doc, n_samples=300, seed=4)
    assert np.array_equal(masks, again)


def test_degenerate_design_rejected():
    doc = D("a", "b")
    m = one_token_model(doc, "a")
    with pytest.raises(SurrogateError, match="degenerate"):
        fit_local_surrogate(doc, m, Sector.GAS_STATIONS, np.ones((5, 2), bool), np.ones(5))


# surrogate fit

def test_ridge_matches_normal_equations_oracle():
    doc = D("recibo", "agua", "canal", "recibo")
    m = one_token_model(D("recibo", "agua", "canal", "agua", "recibo"), "agua", slope=2.0)
    masks, w = perturb_and_weight(doc)
    fit = fit_local_surrogate(doc, m, Sector.GAS_STATIONS, masks, w)
    y = transform_masked(doc, m.feature_space, masks).toarray() @ m.W[Sector.GAS_STATIONS.index]
    coef, intercept = weighted_ridge(masks.astype(float).tolist(), y.tolist(), w.tolist(), 1.0)
    assert np.allclose(fit.coefficients, coef, atol=1e-10)
    assert fit.intercept == pytest.approx(intercept, abs=1e-10)
    assert fit.exhaustive
    assert fit.tokens == ("recibo", "agua", "canal")


@pytest.mark.property
@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(list("abcdefgh")), min_size=1, max_size=9), st.data(), st.floats(0.1, 5))
def test_single_token_model_ranks_that_token_first(lemmas, data, slope):
    token = data.draw(st.sampled_from(lemmas))
    doc = D(*lemmas)
    m = one_token_model(doc, token, slope=slope)
    masks, w = perturb_and_weight(doc)
    fit = fit_local_surrogate(doc, m, Sector.GAS_STATIONS, masks, w)
    coef = dict(zip(fit.tokens, fit.coefficients))
    assert len(fit.coefficients) == len(set(lemmas))
    assert coef[token] > 0
    assert all(abs(coef[token]) > abs(c) for t, c in coef.items() if t != token)


@pytest.mark.property
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(0, 2**63 - 1))
def test_exhaustive_fit_is_seed_independent(s1, s2):
    doc = D("pago", "gasolinera", "repsol", "madrid")
    m = one_token_model(doc, "repsol")
    a = fit_local_surrogate(doc, m, Sector.GAS_STATIONS, *perturb_and_weight(doc, seed=s1))
    b = fit_local_surrogate(doc, m, Sector.GAS_STATIONS, *perturb_and_weight(doc, seed=s2))
    assert np.array_equal(a.coefficients, b.coefficients)


def test_transaction_seed_stable_and_distinct():
    assert transaction_seed(0, "423") == transaction_seed(0, "423")
    assert transaction_seed(0, "423") != transaction_seed(1, "423")
    assert 0 <= transaction_seed(0, "x") < 2**64


# term selection

def test_select_terms_positive_first_and_bigrams():
    doc = D("recibo", "agua", "canal")
    ranked = [("agua", 0.9), ("recibo", 0.3), ("canal", -0.5)]
    terms = select_terms(doc, ranked, 10)
    assert terms[0] == ("agua", 0.9)
    assert ("recibo agua", pytest.approx(0.6)) in terms
    ws = [w for _, w in terms]
    assert ws == sorted(ws, reverse=True)
    assert [t for t, _ in select_terms(doc, ranked, 2)] == ["agua", "recibo agua"]


def test_select_terms_pads_by_magnitude():
    doc = D("a", "b", "c")
    terms = select_terms(doc, [("a", 0.1), ("b", -0.01), ("c", -0.8)], 2)
    # both slots: positive a, then c (largest magnitude among the rest)
    assert {t for t, _ in terms} <= {"a", "c", "a b"}
    assert terms[0][0] == "a"


# lexicon and enterprises

def test_shipped_lexicon_matches_builder():
    raw = json.loads(resources.files("cfxplain.data").joinpath("sector_lexicon.json").read_text("utf-8"))
    assert raw == build_sector_lexicon(ENTERPRISES).to_dict()
    for s in SECTORS:
        bag = LEXICON.bag(s)
        assert bag
        for term in bag:
            assert preprocess(term).lemmas == (term,)


def test_select_enterprise_terms_examples():
    assert select_enterprise_terms(EnterpriseRecord("x", Sector.FLIGHTS, "")) == []
    e = EnterpriseRecord("x", Sector.FLIGHTS, "avion billete avion billete avion billete vuelo aeropuerto")
    assert select_enterprise_terms(e) == ["avion", "billete", "aeropuerto", "vuelo"]
    many = " ".join(["avion"] * 3 + ["billete"] * 3 + ["vuelo", "aeropuerto", "maleta", "equipaje",
                     "pasajero", "tarifa", "destino", "ruta", "piloto", "terminal"])
    got = select_enterprise_terms(EnterpriseRecord("x", Sector.FLIGHTS, many))
    assert len(got) == 10 and got[:2] == ["avion", "billete"]


def test_match_enterprises_forms():
    recs = [EnterpriseRecord("free now", Sector.PRIVATE_TRANSPORT, "taxi"),
            EnterpriseRecord("iberdrola", Sector.ELECTRICITY_BILL, "luz")]
    assert [e.name for e in match_enterprises(["pago", "freenow"], recs)] == ["free now"]
    assert [e.name for e in match_enterprises(["free", "now", "madrid"], recs)] == ["free now"]
    assert [e.name for e in match_enterprises(["recibo", "iberdrola"], recs)] == ["iberdrola"]
    assert match_enterprises(["recibo", "agua"], recs) == []


def test_enrichment_from_iberdrola_row():
    t = Transaction("1", "RECIBO IBERDROLA CLIENTES", 57.59)
    x = Explanation("1", Sector.ELECTRICITY_BILL, terms=(("recibo", 0.4),), verdict="needs_review")
    y = enrich_explanation(x, t, ENTERPRISES)
    iber = next(e for e in ENTERPRISES if e.name == "iberdrola")
    assert set(select_enterprise_terms(iber)) - {"recibo"} <= set(y.enrichment_terms)
    assert y.matched_enterprises == ("iberdrola",)
    z = validate_explanation(y, LEXICON, ENTERPRISES)
    assert z.verdict == "obvious"
    # no match leaves the explanation untouched
    assert enrich_explanation(x, Transaction("2", "RECIBO AGUA", 1.0), ENTERPRISES) == x


def test_enrichment_dedups_against_terms():
    rec = EnterpriseRecord("acme", Sector.FLIGHTS, "vuelo avion")
    x = Explanation("1", Sector.FLIGHTS, terms=(("vuelo", 1.0), ("avion", 0.5)))
    y = enrich_explanation(x, D("acme"), [rec])
    assert y.enrichment_terms == ()


# similarity

def test_similarity_examples():
    assert jaccard_similarity({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert jaccard_similarity({"a"}, {"a"}) == 1.0
    assert jaccard_similarity({"a"}, {"z"}) == 0.0
    assert jaccard_similarity(set(), set()) == 0.0
    assert proximity_similarity(["energia"], ["energias"]) == pytest.approx(0.875)
    assert proximity_similarity(["luz", "agua"], ["luz", "agua"]) == 1.0
    assert proximity_similarity(["gas"], ["bus"]) == 0.0
    assert proximity_similarity(["gas"], []) == 0.0
    with pytest.raises(ValueError):
        proximity_similarity([], ["a"])


words = st.lists(st.text(alphabet="abcdn", min_size=1, max_size=6), max_size=8)


@pytest.mark.property
@settings(max_examples=200, deadline=None)
@given(words, words)
def test_similarity_axioms(A, B):
    j = jaccard_similarity(A, B)
    assert 0.0 <= j <= 1.0
    assert j == jaccard_similarity(B, A)
    if A:
        p = proximity_similarity(A, B)
        assert 0.0 <= p <= 1.0
        assert proximity_similarity(A, A) == 1.0
        assert jaccard_similarity(A, A) == 1.0
        # oracle: mean of best thresholded edit similarity
        best = [max([1.0 if a == b else (lev_ratio(a, b) if lev_ratio(a, b) >= 0.8 else 0.0) for b in B] or [0.0])
                for a in A]
        assert p == pytest.approx(sum(best) / len(A), abs=1e-12)


# verdicts

def _x(terms, predicted=Sector.WATER_BILL, enrichment=(), matched=()):
    return Explanation("9", predicted, terms=tuple((t, 1.0) for t in terms),
                       enrichment_terms=tuple(enrichment), matched_enterprises=tuple(matched))


def test_verdict_examples():
    bag = LEXICON.bag(Sector.WATER_BILL)
    assert validate_explanation(_x(bag), LEXICON, ENTERPRISES).verdict == "validated"
    assert validate_explanation(_x(["qzx"]), LEXICON, ENTERPRISES).verdict == "empty"
    assert validate_explanation(_x([]), LEXICON, ENTERPRISES).verdict == "empty"
    wrong = validate_explanation(_x(LEXICON.bag(Sector.FLIGHTS)), LEXICON, ENTERPRISES)
    assert wrong.verdict == "needs_review"


def test_verdict_tie_is_not_validated():
    lex = SectorLexicon({s: ("comun",) for s in SECTORS}, {})
    assert validate_explanation(_x(["comun"]), lex).verdict == "needs_review"


@pytest.mark.property
@settings(max_examples=150, deadline=None)
@given(st.lists(st.sampled_from(["agua", "luz", "vuelo", "gasolina", "taxi", "qzx", "recibo", "envio"]), max_size=5),
       st.sampled_from(SECTORS), st.booleans())
def test_verdict_partition_is_total(terms, predicted, with_match):
    matched = ("iberdrola",) if with_match else ()
    x = validate_explanation(_x(terms, predicted, matched=matched), LEXICON, ENTERPRISES)
    sims = x.similarity_per_sector
    empty = not terms or all(v == 0 for v in sims.values())
    obvious = not empty and with_match and predicted is Sector.ELECTRICITY_BILL
    top = max(sims.values())
    validated = not empty and not obvious and [s for s in SECTORS if sims[s] == top] == [predicted]
    expected = "empty" if empty else "obvious" if obvious else "validated" if validated else "needs_review"
    assert x.verdict == expected


# rendering and reports

def test_render_templates():
    x = Explanation("423", Sector.GAS_STATIONS, terms=(("cedipsa", 0.5), ("servicio", 0.3), ("estacion", 0.2)))
    assert render_template(x, "en") == (
        "The classification of transaction 423 into the category car and transport - gas stations can be explained by "
        "relevant terms: (in decreasing order) cedipsa, servicio, estacion."
    )
    es = render_template(x, "es")
    assert es.startswith("La clasificación del movimiento 423 en la categoría")
    assert es.endswith("cedipsa, servicio, estacion.")
    empty = Explanation("5", Sector.FLIGHTS)
    assert NO_TERMS["en"] in render_template(empty, "en")
    assert NO_TERMS["es"] in render_template(empty, "es")
    with pytest.raises(ValueError):
        render_template(x, "fr")


def _sims(best):
    return {s: (1.0 if s is best else 0.1) for s in SECTORS}


def test_sector_confusion():
    xs = [Explanation(str(i), s, similarity_per_sector=_sims(s), verdict="validated") for i, s in enumerate(SECTORS)]
    assert np.array_equal(sector_confusion(xs), np.eye(8, dtype=int))
    odd = Explanation("e", Sector.ELECTRICITY_BILL, similarity_per_sector=_sims(Sector.PUBLIC_TRANSPORT),
                      verdict="needs_review")
    dropped = Explanation("z", Sector.FLIGHTS, verdict="empty")
    m = sector_confusion(xs + [odd, dropped])
    assert m[Sector.ELECTRICITY_BILL.index, Sector.PUBLIC_TRANSPORT.index] == 1
    assert m.sum(axis=1).tolist() == [1, 1, 1, 1, 1, 1, 2, 1]


def test_annotations_and_five_way(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("transaction_id,judgment\n1,coherent\n2,Ambiguous\n", encoding="utf-8")
    ann = load_annotations(p)
    assert ann == {"1": "coherent", "2": "ambiguous"}
    xs = [Explanation(i, Sector.FLIGHTS, verdict=v) for i, v in
          [("1", "needs_review"), ("2", "needs_review"), ("3", "needs_review"), ("4", "validated"), ("5", "empty")]]
    rep = five_way_report(xs, ann)
    assert rep["counts"] == {"validated": 1, "obvious": 0, "coherent": 1, "empty": 1, "ambiguous": 1, "unreviewed": 1}
    assert rep["satisfactory_percent"] == pytest.approx(40.0)
    bad = tmp_path / "b.csv"
    bad.write_text("transaction_id,judgment\n1,great\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_annotations(bad)


# end to end on a tiny model

@pytest.fixture(scope="module")
def tiny_model():
    from cfxplain.pipeline import fit_model, preprocess_corpus
    from cfxplain.synthetic import generate_synthetic_corpus
    corpus = generate_synthetic_corpus(400, 11)
    docs = preprocess_corpus(corpus, CFG)
    return fit_model(docs, [t.label for t in corpus], "svc", percentile=50, seed=0), corpus


def test_explain_transaction_end_to_end(tiny_model):
    model, corpus = tiny_model
    t = Transaction("423", "COMPRA TARJ. 1234 GASOLINERA REPSOL MADRID", 40.0)
    x = explain_transaction(t, model, CFG, ENTERPRISES, seed=3)
    assert x.predicted is Sector.GAS_STATIONS
    ws = [w for _, w in x.terms]
    assert ws == sorted(ws, reverse=True) and all(math.isfinite(w) for w in ws)
    assert len(x.terms) <= 10
    assert "gasolinera" in [term for term, _ in x.terms[:3]]
    assert explain_transaction(t, model, CFG, ENTERPRISES, seed=3) == x


def test_explain_codes_only_is_empty(tiny_model):
    model, _ = tiny_model
    x = explain_transaction(Transaction("7", "12345 ABC123 DE LA", 1.0), model, CFG, ENTERPRISES)
    assert x.terms == () and x.verdict == "empty"
    assert validate_explanation(x, LEXICON, ENTERPRISES).verdict == "empty"
