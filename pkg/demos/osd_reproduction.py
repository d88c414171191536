# %% [markdown]
# Three-additive OSD curves for d = 2, 3, 4
#
# Exponents (1, 1/2, 0), e_1 = 0, and the two boundary values at a and
# a^2 copies.  Everything else follows without free parameters.

# %%
from qadditive import io
from qadditive.analysis import OSD_INPUTS, OSD_NMAX, asymptote, build_osd_model, check_osd_consistency

# %%
for d, spec in OSD_INPUTS.items():
    model = build_osd_model(spec)
    limit = asymptote(model)
    margin = check_osd_consistency(spec.a, spec.e2, spec.e3)["osd_consistency"].margin
    print(f"d={d} a={spec.a} e3={spec.e3}  limit E/N -> {limit.value:.4f}  consistency margin {margin:.3f}")

# %%
m3 = build_osd_model(OSD_INPUTS[3])
rows = io.figure_rows(m3, None, (1, OSD_NMAX[3]))
for n, per_copy, _ in rows[::6]:
    print(n, round(per_copy, 4))

# %% [markdown]
# d=3 reaches 0.5334 per copy at 40 copies and approaches 0.856.  The
# d=4 curve is still far from its limit at 30 copies.

# %%
m4 = build_osd_model(OSD_INPUTS[4])
print(io.emit_figure_data(m4, None, (25, 30)))
