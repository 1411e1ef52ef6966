#pragma once
// Generated by tools/oracles/torch_heads.py; do not edit.

#include <vector>

namespace oracle {

// GRU head: D=4, hidden=5, 2 layers, B=2, T=3.
inline const std::vector<double> kGruLogits = {0.11784369743669107, 0.0091697620074171482, -0.25877895304484499, 0.068804853489239343, 0.3660274249874732, -0.32489357937177982, -0.21251274454810634, 0.05248707396918581, 0.078247072214275515, -0.2765930554773009, 0.02117614668235121, 0.44118762423439373, -0.36775954167450997, -0.23606130474246198, 0.017875922420229007, 0.11528092886665417, -0.28657154894245501, -0.003843366296256423, 0.48129020692454622, -0.39102449291165076, -0.248152332312333, 0.11730924481227317, 0.006990489707779074, -0.25562060469328018, 0.067181399187943441, 0.36482375426159847, -0.32182087686270411, -0.21500868078997776, 0.05199006717551255, 0.076384645422220093, -0.27385364249023469, 0.019740255025240128, 0.44017705898442089, -0.36510690539955226, -0.23824457671452529, 0.018143269544750706, 0.11502509374468919, -0.2865308644898813, -0.003636516223698677, 0.48100047006047048, -0.39088249290256827, -0.24803356683955541};

// Transformer head: D=4, model=6, heads=2, ffn=8, 2 layers, B=2, T=5.
inline const std::vector<double> kTransformerLogits = {0.56461410158674008, 0.031911849581484672, -0.48176470950808337, 0.31555186609008967, -0.0096393739820538893, 0.049440016658939732, -0.11086484649196976, 0.54577549804490599, 0.086386607778130689, -0.54074500333095221, 0.34533230394173786, 0.0067986321212883949, -0.0038226274875706595, -0.051215498095312173, 0.5206711406509642, 0.12763570812245392, -0.57456627704295737, 0.35239795183800626, 0.030526406630047853, -0.044784144045146274, -0.016428463940032556, 0.51306613191295369, 0.12806885336784352, -0.56758002984718803, 0.34198473377559813, 0.038415767412373236, -0.045641124829269221, -0.023093600845265239, 0.53006310736930062, 0.092858344026936615, -0.53427769047834961, 0.3296218088298758, 0.022774253338173789, -0.010933807385745717, -0.057032576218892406, 0.56624340624974545, 0.029654271208210334, -0.48016899279351016, 0.31552991318419343, -0.011203730283339264, 0.051696701511916958, -0.11252423514654772, 0.54553215544718148, 0.082035057900329292, -0.53428533551163437, 0.34045601612585119, 0.0073048940945441565, 0.00033044925146808596, -0.05765456019842502, 0.52018940642938505, 0.13341326853056595, -0.58233796872543142, 0.35772249628376762, 0.030691819891922711, -0.050344986513601718, -0.0086500396588035655, 0.51415251387580663, 0.13074973901314296, -0.57249614087694134, 0.34632666663050826, 0.037129291438784906, -0.048145286483994708, -0.018229851557488908, 0.52368922699635245, 0.093644814594469619, -0.52902730793083974, 0.32133500243496427, 0.029361833136433646, -0.012057564950604442, -0.062014833157583632};

}  // namespace oracle
