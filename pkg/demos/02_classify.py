#!/usr/bin/env python
# coding: utf-8

# # Sector classification on the synthetic corpus
#
# Descriptions are normalized to lemmas, counted as unigrams plus adjacent
# bigrams, and the top half of the vocabulary by chi-squared score is kept.

# In[1]:


import time

import numpy as np

from cfxplain.classify import RfParams
from cfxplain.corpus import SECTORS, deduplicate
from cfxplain.pipeline import cross_validate, preprocess_corpus
from cfxplain.synthetic import generate_synthetic_corpus
from cfxplain.textprep import default_config

cfg = default_config()
corpus = deduplicate(generate_synthetic_corpus(2000, 7))
print(len(corpus), "transactions after near-duplicate removal")
for t in corpus[:5]:
    print(" ", t.label.value.ljust(18), t.description)


# ## What the classifier actually sees

# In[2]:


docs = preprocess_corpus(corpus[:5], cfg)
for t, d in zip(corpus[:5], docs):
    print(f"{t.description!r:50s} -> {list(d.lemmas)}")


# ## Ten-fold cross-validation
#
# The forest is cut to 100 trees to keep the demo short; the default is 500.

# In[3]:


for kind, extra in (("svc", {}), ("rf", {"rf_params": RfParams(n_estimators=100)})):
    t0 = time.perf_counter()
    r = cross_validate(corpus, kind, k=10, seed=7, cfg=cfg, **extra)
    print(f"{kind}: acc {r.accuracy:.4f}  macro-P {r.macro_precision:.4f}  macro-R {r.macro_recall:.4f}"
          f"  ({time.perf_counter() - t0:.1f}s)")

print("confusion (rows gold, columns predicted), last model:")
np.set_printoptions(linewidth=120)
print("  ", " ".join(s.value[:5].rjust(5) for s in SECTORS))
for s, row in zip(SECTORS, r.confusion):
    print(s.value[:5].rjust(5), " ".join(f"{v:5d}" for v in row))
