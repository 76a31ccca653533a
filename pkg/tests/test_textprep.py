import re
import unicodedata

import pytest
from hypothesis import given, settings, strategies as st

from cfxplain.textprep import (
    NormalizationConfig, default_config, expand_abbreviations, lemmatize, preprocess, remove_stopwords, render,
    strip_numeric_and_codes, strip_symbols_diacritics,
)

CFG = default_config()


def test_strip_numeric_and_codes_examples():
    assert strip_numeric_and_codes("RECIBO 12345 LUZ", CFG) == "RECIBO LUZ"
    assert strip_numeric_and_codes("LIC 4711 TAXI MADRID", CFG) == "LIC TAXI MADRID"
    assert strip_numeric_and_codes("ABC123X FACTURA", CFG) == "FACTURA"


def test_expand_abbreviations_examples():
    assert expand_abbreviations("E.S. REPSOL", CFG) == "estacion de servicio REPSOL"
    assert expand_abbreviations("CONSTRUCCIONES S.L.", CFG) == "CONSTRUCCIONES sociedad limitada"
    assert expand_abbreviations("RECIBO AGUA", CFG) == "RECIBO AGUA"


def test_acronyms_case_insensitive_and_trailing_period_optional():
    assert expand_abbreviations("e.s. cepsa", CFG) == "estacion de servicio cepsa"
    assert expand_abbreviations("GALP E.S", CFG) == "GALP estacion de servicio"
    # longest key wins over its prefix
    assert expand_abbreviations("IBERDROLA S.A.U", CFG) == "IBERDROLA sociedad anonima unipersonal"


def test_acronym_needs_internal_periods():
    assert expand_abbreviations("ES REPSOL", CFG) == "ES REPSOL"
    assert expand_abbreviations("FRESA", CFG) == "FRESA"


def test_expansion_runs_before_period_stripping():
    assert preprocess("e.s. galp").lemmas == ("estacion", "servicio", "galp")


def test_strip_symbols_diacritics_examples():
    assert strip_symbols_diacritics("estación") == "estacion"
    assert strip_symbols_diacritics("PAGO*TARJ.-MÓVIL") == "pago tarj movil"
    assert strip_symbols_diacritics("agua") == "agua"


def test_remove_stopwords_examples():
    assert remove_stopwords(["pago", "de", "la", "compra"], CFG) == ["pago", "compra"]
    assert remove_stopwords([], CFG) == []
    assert remove_stopwords(["ser", "recibo"], CFG) == ["recibo"]


def test_general_verbs_in_stoplist():
    for w in ("ser", "es", "estar", "esta", "hacer", "hizo", "tener", "tiene"):
        assert w in CFG.stopword_list


def test_lemmatize_examples():
    assert lemmatize(["gasolineras"], CFG) == ["gasolinera"]
    assert lemmatize(["viajeros"], CFG) == ["viajero"]
    assert lemmatize(["renfe"], CFG) == ["renfe"]


@pytest.mark.parametrize("surface, lemma", [
    ("combustibles", "combustible"), ("trenes", "tren"), ("motores", "motor"), ("ciudades", "ciudad"),
    ("luces", "luz"), ("papeles", "papel"), ("vuelos", "vuelo"), ("autobuses", "autobus"), ("taxis", "taxi"),
    ("gas", "gas"), ("autogas", "autogas"),
])
def test_plural_handling(surface, lemma):
    assert lemmatize([surface], CFG) == [lemma]


def test_lemma_dictionary_values_are_fixed_points():
    for value in set(CFG.lemma_dictionary.values()):
        assert lemmatize([value], CFG) == [value], value


def test_preprocess_examples():
    assert preprocess("RECIBO AGUA-12345-BO.").lemmas == ("recibo", "agua", "bo")
    assert preprocess("").lemmas == ()


def test_ten_word_description_bookkeeping():
    # 10 words: 3 stopwords ("de", "la", "en") and one number
    raw = "PAGO de la CUOTA en GASOLINERA REPSOL 4711 MADRID NORTE"
    assert len(raw.split()) == 10
    assert preprocess(raw).lemmas == ("pago", "cuota", "gasolinera", "repsol", "madrid", "norte")


def test_bank_statement_rows():
    assert preprocess("LIC 4711 TAXI MADRID").lemmas == ("lic", "taxi", "madrid")
    assert preprocess("RECIBO IBERDROLA CLIENTES, S.A.U RECIBO 123").lemmas == (
        "recibo", "iberdrola", "cliente", "sociedad", "anonima", "unipersonal", "recibo")
    assert preprocess("COMPRA TARJ. 1234 Ryanair-Madrid").lemmas == ("compra", "tarjeta", "ryanair", "madrid")


def test_digest_changes_with_content():
    other = NormalizationConfig.from_dict({**CFG.to_dict(), "stopwords": sorted(CFG.stopword_list | {"xyz"})})
    assert other.digest != CFG.digest
    assert NormalizationConfig.from_dict(CFG.to_dict()).digest == CFG.digest


_text = st.text(
    alphabet=st.sampled_from(list("abcdefghijklmnopqrstuvwxyzáéíóúñüABCDEFGHIJKLMNOPQRSTUVWXYZÁÉÑ0123456789 .,-*/()'")),
    max_size=60,
)
_words = st.lists(
    st.sampled_from(["recibo", "de", "la", "AGUA", "gasolineras", "E.S.", "S.L.", "4711", "ab12cd", "Móvil",
                     "TAXIS", "el", "ser", "viajeros", "estación", "luz", "-", "*", "tarj."]),
    max_size=12,
).map(" ".join)


@pytest.mark.property
@settings(max_examples=300, deadline=None)
@given(st.one_of(_text, _words))
def test_output_tokens_are_clean(raw):
    doc = preprocess(raw, CFG)
    for tok in doc.lemmas:
        assert tok
        assert not re.search(r"[0-9]", tok)
        assert tok not in CFG.stopword_list
        assert re.fullmatch(r"[a-z]+", tok), tok
        assert unicodedata.normalize("NFKD", tok) == tok


@pytest.mark.property
@settings(max_examples=300, deadline=None)
@given(st.one_of(_text, _words))
def test_render_round_trip_preserves_token_set(raw):
    doc = preprocess(raw, CFG)
    assert set(preprocess(render(doc), CFG).lemmas) == set(doc.lemmas)


@pytest.mark.property
@settings(max_examples=100, deadline=None)
@given(_words)
def test_deterministic(raw):
    assert preprocess(raw, CFG) == preprocess(raw, CFG)
