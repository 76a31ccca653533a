#!/usr/bin/env python
# coding: utf-8

# # Footprint of a handful of card payments
#
# Each sector turns a euro amount into a physical quantity (liters, km, kWh)
# through an average price, then multiplies by an emission factor. Water is
# the exception and is reported in liters consumed.

# In[1]:


from pathlib import Path

from cfxplain.carbon import default_params, estimate_footprint
from cfxplain.corpus import load_transactions
from cfxplain.textprep import preprocess

rows = load_transactions(Path(__file__).parents[1] / "tests" / "fixtures" / "cf_samples.csv")
params = default_params()


# ## Per-transaction estimates
#
# Labels are taken as given here; in the full pipeline they come from the classifier.

# In[2]:


for t in rows:
    est = estimate_footprint(t, t.label, preprocess(t.description), params)
    print(f"{t.description[:38]:38s} {t.amount_eur:8.2f} EUR  {est.formula_id}  {est.quantity:11.3f} {est.unit}")


# ## Taxi or company car?
#
# Private transport has two price profiles. A taxi keyword in the description picks the first.

# In[3]:


taxi = rows[1]
for text in (taxi.description, "CABIFY VIAJE MADRID"):
    est = estimate_footprint(taxi, taxi.label, preprocess(text), params)
    print(text, "->", est.parameters_used["profile"], round(est.quantity, 3))
