#!/usr/bin/env python
# coding: utf-8

# # Explaining single decisions
#
# Every distinct token of a description is switched on and off, the model is
# rescored, and a kernel-weighted ridge fit gives each token a relevance.
# The top tokens are then checked against per-sector vocabularies built from
# enterprise descriptions.

# In[1]:


from cfxplain.corpus import Transaction, deduplicate
from cfxplain.explain import (
    explain_transaction, load_enterprises, load_lexicon, validate_explanation, verdict_summary, with_rendering,
)
from cfxplain.pipeline import fit_model, preprocess_corpus
from cfxplain.synthetic import generate_synthetic_corpus
from cfxplain.textprep import default_config

cfg = default_config()
corpus = deduplicate(generate_synthetic_corpus(2000, 7))
docs = preprocess_corpus(corpus, cfg)
model = fit_model(docs, [t.label for t in corpus], "svc", seed=7)
enterprises, lexicon = load_enterprises(), load_lexicon()


# ## A few hand-written transactions

# In[2]:


samples = [
    Transaction("423", "COMPRA TARJ. 5520 E.S. CEDIPSA SERVICIO ESTACION", 40.0),
    Transaction("17", "RECIBO IBERDROLA CLIENTES, S.A.U RECIBO 88123", 23.0),
    Transaction("88", "RECIBO AGUA-30211-BO.", 50.11),
    Transaction("90", "REF 0042 AB12CD34", 12.0),
]
for t in samples:
    x = explain_transaction(t, model, cfg, enterprises, seed=7)
    x = with_rendering(validate_explanation(x, lexicon, enterprises))
    print(x.verdict.ljust(12), x.rendered["en"])
    if x.enrichment_terms:
        print(" " * 13, "enrichment:", ", ".join(x.enrichment_terms))


# ## Verdicts over the first 300 corpus rows, both similarity metrics

# In[3]:


xs = [explain_transaction(t, model, cfg, enterprises, doc=d, seed=7) for t, d in zip(corpus[:300], docs[:300])]
for metric in ("proximity", "jaccard"):
    pct = verdict_summary([validate_explanation(x, lexicon, enterprises, metric) for x in xs])["percent"]
    print(metric.ljust(10), "  ".join(f"{k} {v:.1f}%" for k, v in pct.items()))
