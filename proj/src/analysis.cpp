#include "oscdamp/analysis.hpp"

#include "oscdamp/error.hpp"

namespace oscdamp {

using Eigen::VectorXcd;
using Eigen::VectorXd;

Analysis analyze(Network net, double band_lo, double band_hi)
{
    Analysis a;
    a.net = std::move(net);
    a.band_lo = band_lo;
    a.band_hi = band_hi;
    a.op = solve_base_case(a.net);
    a.qep = assemble_qep(a.net, a.op);
    a.lq = line_quantities(a.net, a.op);
    a.modes = solve_modes(a.qep);
    classify_interarea(a.modes, band_lo, band_hi);
    for (int i = 0; i < static_cast<int>(a.modes.size()); ++i)
        if (a.modes[i].interarea) a.interarea.push_back(i);
    a.rmap = redispatch_map(a.net, a.op, a.qep.L);
    return a;
}

const Mode& band_mode(const Analysis& a, int k)
{
    if (k < 1 || k > static_cast<int>(a.interarea.size()))
        throw DataError("unknown mode " + std::to_string(k) + " (" + std::to_string(a.interarea.size()) +
                        " modes in band)");
    return a.modes[a.interarea[k - 1]];
}

SensitivityCoefficients mode_coefficients(const Analysis& a, const Mode& mode, LoadReactiveTerm term)
{
    if (mode.resonant)
        throw ResonantModeError("mode is resonant (algebraic multiplicity above one); sensitivities refused");
    const ModeShapeEdges e = edge_shapes(a.net, mode, a.op);
    SensitivityCoefficients c;
    c.Ctheta = coefficients_theta(e, a.lq);
    c.CV = coefficients_v(a.net, e, a.lq, mode, a.op, term);
    c.alpha = alpha_computed(mode, a.qep);
    c.alpha_phase = std::arg(*c.alpha);
    c.CP = coefficients_p(c.Ctheta, c.CV, c.alpha_phase, a.rmap);
    for (int i = 0; i < static_cast<int>(a.modes.size()); ++i)
        if (&a.modes[i] == &mode) c.mode = i;
    return c;
}

namespace {

double phase_for(const SensitivityCoefficients& c, const RankOptions& opt)
{
    if (opt.alpha == AlphaSource::Computed) {
        if (!c.alpha) throw DataError("computed alpha unavailable");
        return std::arg(*c.alpha);
    }
    if (!opt.estimated_phase) throw DataError("estimated alpha phase required");
    return *opt.estimated_phase;
}

PairScore finish(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c, int plus, int minus,
                 cplx scaled, const RankOptions& opt)
{
    PairScore s;
    s.plus = a.net.generators[plus].id;
    s.minus = a.net.generators[minus].id;
    s.amount = opt.amount;
    s.scaled_dlambda = scaled;
    s.dzeta_score = dzeta_first_order(mode.lambda, scaled);
    if (opt.alpha == AlphaSource::Computed) {
        const double mag = std::abs(*c.alpha);
        s.dlambda = scaled / mag;
        s.dzeta = opt.metric == ZetaMetric::Exact ? damping_ratio(mode.lambda + *s.dlambda) - damping_ratio(mode.lambda)
                                                  : s.dzeta_score / mag;
    }
    return s;
}

bool sort_by_dzeta(const RankOptions& opt)
{
    return opt.alpha == AlphaSource::Computed && opt.metric == ZetaMetric::Exact;
}

} // namespace

PairScore score_pair(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c, int plus, int minus,
                     const RankOptions& opt, OperatingPoint* op_out)
{
    if (!(opt.amount > 0)) throw DataError("amount must be positive");
    if (plus < 0 || plus >= a.net.m || minus < 0 || minus >= a.net.m) throw DataError("unknown generator");
    const VectorXd dP = pair_redispatch(a.net, plus, minus, opt.amount);
    const double phase = phase_for(c, opt);
    cplx scaled;
    if (opt.source == DThetaSource::Linear) {
        const VectorXcd cp = coefficients_p(c.Ctheta, c.CV, phase, a.rmap);
        scaled = (cp[plus] - cp[minus]) * opt.amount;
    } else {
        OperatingPoint op1 = resolve_redispatch_nonlinear(a.net, a.op, dP);
        auto [dth, dV] = state_change(a.net, a.op, op1);
        scaled = std::polar(1.0, -phase) * numerator(c.Ctheta, c.CV, dth, dV);
        if (op_out) *op_out = std::move(op1);
    }
    return finish(a, mode, c, plus, minus, scaled, opt);
}

std::vector<PairScore> rank_mode(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c,
                                 const RankOptions& opt)
{
    if (!(opt.amount > 0)) throw DataError("amount must be positive");
    if (a.net.m < 2) throw DataError("ranking needs at least two generators");
    std::vector<PairScore> out;
    const double phase = phase_for(c, opt);
    VectorXcd cp;
    if (opt.source == DThetaSource::Linear) cp = coefficients_p(c.Ctheta, c.CV, phase, a.rmap);
    for (int i = 0; i < a.net.m; ++i)
        for (int j = 0; j < a.net.m; ++j) {
            if (i == j) continue;
            if (opt.source == DThetaSource::Linear)
                out.push_back(finish(a, mode, c, i, j, (cp[i] - cp[j]) * opt.amount, opt));
            else
                out.push_back(score_pair(a, mode, c, i, j, opt));
        }
    sort_pairs(a.net, out, sort_by_dzeta(opt));
    return out;
}

AlphaRun estimate_mode_alpha(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c,
                             const AlphaOptions& opt)
{
    if (opt.samples < 3 || retained_count(opt.samples, opt.trim) < 10)
        throw DataError("insufficient samples: at least 10 must remain after trimming");
    AlphaRun run;
    const auto perts = sample_loads(a.net, opt.seed, opt.samples, opt.sampling);
    run.cloud = collect_samples(a.net, a.op, mode, c.Ctheta, c.CV, perts);
    run.estimate = estimate_alpha_phase(run.cloud, opt.trim);
    run.cloud.retained = run.estimate.retained;
    run.exact_phase = std::arg(alpha_computed(mode, a.qep));
    return run;
}

WhatIf whatif(const Analysis& a, const Mode& mode, const SensitivityCoefficients& c, const VectorXd& dP,
              const RankOptions& opt, bool with_exact)
{
    check_balanced(a.net, dP);
    std::vector<int> nz;
    for (int g = 0; g < a.net.m; ++g)
        if (dP[g] != 0.0) nz.push_back(g);
    if (nz.empty()) throw DataError("redispatch is zero");
    const bool is_pair = nz.size() == 2 && dP[nz[0]] == -dP[nz[1]];

    WhatIf w;
    OperatingPoint op1;
    bool have_op = false;
    RankOptions o = opt;
    if (is_pair) {
        const int plus = dP[nz[0]] > 0 ? nz[0] : nz[1];
        const int minus = plus == nz[0] ? nz[1] : nz[0];
        o.amount = dP[plus];
        w.score = score_pair(a, mode, c, plus, minus, o, &op1);
        have_op = o.source == DThetaSource::Nonlinear;
    } else {
        o.amount = 0.5 * dP.cwiseAbs().sum();
        const double phase = phase_for(c, o);
        cplx scaled;
        if (o.source == DThetaSource::Linear) {
            scaled = (coefficients_p(c.Ctheta, c.CV, phase, a.rmap).transpose() * dP.cast<cplx>()).value();
        } else {
            op1 = resolve_redispatch_nonlinear(a.net, a.op, dP);
            have_op = true;
            auto [dth, dV] = state_change(a.net, a.op, op1);
            scaled = std::polar(1.0, -phase) * numerator(c.Ctheta, c.CV, dth, dV);
        }
        w.score = finish(a, mode, c, 0, 0, scaled, o);
        w.score.plus = w.score.minus = 0;
    }
    if (!have_op) op1 = resolve_redispatch_nonlinear(a.net, a.op, dP);

    VectorXd dV;
    if (o.source == DThetaSource::Linear) {
        w.dtheta = a.rmap.Ttheta * dP;
        dV = a.rmap.TV * dP;
    } else {
        std::tie(w.dtheta, dV) = state_change(a.net, a.op, op1);
    }
    w.dp = line_quantities(a.net, op1).p - a.lq.p;

    const cplx factor = o.alpha == AlphaSource::Computed ? 1.0 / *c.alpha : std::polar(1.0, -phase_for(c, o));
    w.ctheta_dtheta = factor * (c.Ctheta.transpose() * w.dtheta.cast<cplx>()).value();
    w.cv_dv = factor * (c.CV.transpose() * dV.cast<cplx>()).value();
    const VectorXcd ct = factor * c.Ctheta;
    w.re_ctheta = ct.real().cwiseAbs();
    w.re_ctheta_dtheta = (ct.array() * w.dtheta.array().cast<cplx>()).real().abs().matrix();
    if (with_exact) {
        try {
            w.exact_lambda = track_eigenvalue(a.net, a.op, mode.lambda, dP).lambda;
            w.exact_zeta_after = damping_ratio(*w.exact_lambda);
        } catch (const NumericalError&) {
            // the prediction stands on its own; the oracle value is optional
        }
    }
    return w;
}

} // namespace oscdamp
