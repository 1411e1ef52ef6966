"""High-precision reference values frozen into the unit tests (mpmath, 50 digits)."""

import mpmath as mp

mp.mp.dps = 50


def softmax(z):
    m = max(z)
    e = [mp.e ** (mp.mpf(v) - m) for v in z]
    s = sum(e)
    return [v / s for v in e]


def show(name, values):
    print(name, ", ".join(mp.nstr(v, 17) for v in values))


show("softmax[1,2,3,0,-1,0.5,2.5]", softmax([1, 2, 3, 0, -1, 0.5, 2.5]))
show("pe(pos=1,d=4)", [mp.sin(1), mp.cos(1), mp.sin(mp.mpf(1) / 100), mp.cos(mp.mpf(1) / 100)])
show("pe(pos=7,d=8)", [f(7 / mp.power(10000, mp.mpf(i) / 8)) for i in (0, 2, 4, 6) for f in (mp.sin, mp.cos)])

# Masked cross-entropy: logits[j] = sin(1.3 j + 0.2) * 2 over (2, 3, 7); labels below.
logits = [2 * mp.sin(1.3 * j + mp.mpf("0.2")) for j in range(42)]
labels = [3, -1, 0, 6, -1, 2]
terms = []
for r, y in enumerate(labels):
    if y < 0:
        continue
    row = logits[7 * r:7 * r + 7]
    terms.append(mp.log(sum(mp.e ** v for v in row)) - row[y])
show("masked_ce", [sum(terms) / len(terms)])

# Weighted mean with weights (0.5, 0.3, 0.2) of p_m[c] = softmax(sin(c * (m + 1) + m))
ps = [softmax([mp.sin(c * (m + 1) + m) for c in range(7)]) for m in range(3)]
w = [mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.2")]
show("ensemble", [sum(w[m] * ps[m][c] for m in range(3)) for c in range(7)])
show("macro_f1_example", [(mp.mpf(2) / 3 + mp.mpf("0.8") + 1) / 7])
