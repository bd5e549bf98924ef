#include "tdsym/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdsym/error.hpp"
#include "tdsym/parallel.hpp"

namespace tdsym {

namespace {

constexpr double check_tolerance = 1e-9;

bool exceeds(double lhs, double rhs) noexcept {
    return lhs > rhs + check_tolerance * (1.0 + std::abs(rhs));
}

// Trapezoidal integral of w(s) * g(j) over the sample grid.
template <class G>
double integrate_samples(const StateFunction& x, double rate, G&& g) {
    double acc = 0.0;
    const double step = x.grid_step();
    for (std::size_t j = 0; j < x.count(); ++j) {
        const double w = (j == 0 || j + 1 == x.count()) ? 0.5 : 1.0;
        acc += w * std::exp(rate * x.time(j)) * g(j);
    }
    return acc * step;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

KFunction::KFunction(double c, double p) : m_c(c), m_p(p) {
    if (!(c > 0.0) || !(p > 0.0) || !std::isfinite(c) || !std::isfinite(p))
        throw Error(ErrorCode::shape_error, "class-K function needs positive constants");
}

double KFunction::operator()(double s) const noexcept {
    if (s <= 0.0) return 0.0;
    return m_p == 1.0 ? m_c * s : m_c * std::pow(s, m_p);
}

double KFunction::inverse(double v) const {
    if (v <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while ((*this)(hi) <= v) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((*this)(mid) <= v) lo = mid;
        else hi = mid;
    }
    return lo;
}

KLFunction::KLFunction(double gain, double rate) : m_gain(gain), m_rate(rate) {
    if (!(gain >= 1.0) || !(rate > 0.0) || !std::isfinite(gain) || !std::isfinite(rate))
        throw Error(ErrorCode::shape_error, "class-KL function needs gain >= 1 and a positive rate");
}

double KLFunction::operator()(double s, double t) const noexcept {
    if (s <= 0.0) return 0.0;
    return m_gain * s * std::exp(-m_rate * t);
}

double halanay_rate(double a, double b, double delta) {
    if (!(a > b) || b < 0.0)
        throw Error(ErrorCode::no_decay_rate, "need a > b >= 0 for an exponential decay rate");
    if (b == 0.0) return a;
    if (delta == 0.0) return a - b;
    auto g = [&](double s) { return s - a + b * std::exp(s * delta); };
    double lo = 0.0;      // g < 0
    double hi = a - b;    // g >= 0
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return lo;
}

DeltaIssCertificate halanay_certificate(double a, double b, double input_gain, double delta) {
    const double sigma = halanay_rate(a, std::abs(b), delta);
    const double gain = std::abs(input_gain) / (a - std::abs(b));
    return DeltaIssCertificate{KLFunction(std::exp(sigma * delta), sigma),
                               KFunction(gain > 0.0 ? gain : std::numeric_limits<double>::min(), 1.0)};
}

nlohmann::json FalsificationReport::to_json() const {
    nlohmann::json j;
    j["check"] = check;
    j["probes"] = probes;
    j["evaluations"] = evaluations;
    j["worst_margin"] = worst_margin;
    j["passed"] = passed();
    j["violations"] = nlohmann::json::array();
    for (const auto& v : violations) {
        j["violations"].push_back(
            {{"probe", v.probe}, {"time", v.time}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"condition", v.condition}});
    }
    return j;
}

std::mt19937_64 item_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

StateFunction random_history(const Box& box, double delta, std::size_t samples, bool allow_kink,
                             std::mt19937_64& rng) {
    const std::size_t n = box.dim();
    auto point = [&] {
        Vector v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::uniform_real_distribution<double>(box.lo()[i], box.hi()[i])(rng);
        return v;
    };
    const bool kink = allow_kink && std::bernoulli_distribution(0.5)(rng);
    if (!kink) {
        const Vector c = point();
        return StateFunction::constant(delta, samples, c);
    }
    const Vector start = point();
    const Vector corner = point();
    const Vector end = point();
    const std::size_t k = samples > 2 ? 1 + pick(rng, samples - 2) : 0;
    std::vector<double> buf(samples * n);
    for (std::size_t j = 0; j < samples; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double v;
            if (j <= k) v = k == 0 ? corner[i] : start[i] + (corner[i] - start[i]) * double(j) / double(k);
            else v = corner[i] + (end[i] - corner[i]) * double(j - k) / double(samples - 1 - k);
            buf[j * n + i] = v;
        }
    }
    return StateFunction(delta, n, std::move(buf));
}

std::vector<Violation> delta_iss_violations(const TimeDelaySystem& sys, const DeltaIssCertificate& cert,
                                            const StateFunction& xi1, const StateFunction& xi2,
                                            const std::vector<Vector>& u1, const std::vector<Vector>& u2,
                                            double tau, std::size_t substeps, double* worst_margin,
                                            std::size_t* evaluations) {
    if (u1.size() != u2.size()) throw Error(ErrorCode::shape_error, "input words differ in length");
    check_input_delay(sys, tau);
    const std::size_t n = sys.state_dim();
    const std::size_t lag = (xi1.count() - 1) * substeps;
    const double h = xi1.grid_step() / static_cast<double>(substeps);

    // e(t) = x1(t) - x2(t) on [-delta, k tau] at step h
    std::vector<double> e;
    {
        Vector a(n), b(n);
        for (std::size_t j = 0; j < lag; ++j) {
            const double s = -sys.delta() + static_cast<double>(j) * h;
            xi1.value_at(s, a);
            xi2.value_at(s, b);
            for (std::size_t i = 0; i < n; ++i) e.push_back(a[i] - b[i]);
        }
    }
    StateFunction x1 = xi1, x2 = xi2;
    std::vector<double> input_gap;  // max input difference over segments 0..k
    double gap = 0.0;
    for (std::size_t k = 0; k < u1.size(); ++k) {
        auto r1 = integrate_step(sys, x1, u1[k], tau, substeps);
        auto r2 = integrate_step(sys, x2, u2[k], tau, substeps);
        const std::size_t first = k == 0 ? 0 : 1;
        for (std::size_t p = first; p < r1.trajectory.points(); ++p) {
            const auto a = r1.trajectory.at(p);
            const auto b = r2.trajectory.at(p);
            for (std::size_t i = 0; i < n; ++i) e.push_back(a[i] - b[i]);
        }
        gap = std::max(gap, inf_distance(u1[k], u2[k]));
        input_gap.push_back(gap);
        x1 = std::move(r1.end);
        x2 = std::move(r2.end);
    }

    const double initial_gap = xi1.sampled_distance(xi2);
    const std::size_t per_segment = steps_in(tau, h);
    const std::size_t total = e.size() / n;
    std::vector<Violation> out;
    Violation worst;
    double worst_m = -std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    for (std::size_t j = lag; j < total; ++j) {
        double lhs = 0.0;
        for (std::size_t w = j - lag; w <= j; ++w)
            lhs = std::max(lhs, inf_norm(std::span<const double>(e.data() + w * n, n)));
        const std::size_t step = j - lag;
        const double t = static_cast<double>(step) * h;
        // inputs active on [0, t): segments 0 .. ceil(step / per_segment) - 1
        const std::size_t active = (step + per_segment - 1) / per_segment;
        const double ugap = active == 0 ? 0.0 : input_gap[std::min(active, input_gap.size()) - 1];
        const double rhs = cert.beta(initial_gap, t) + cert.gamma(ugap);
        ++evals;
        if (lhs - rhs > worst_m) {
            worst_m = lhs - rhs;
            worst = Violation{0, t, lhs, rhs, "delta-iss"};
        }
    }
    if (exceeds(worst.lhs, worst.rhs)) out.push_back(worst);
    if (worst_margin) *worst_margin = worst_m;
    if (evaluations) *evaluations = evals;
    return out;
}

FalsificationReport check_delta_iss(const TimeDelaySystem& sys, const DeltaIssCertificate& cert,
                                    const ProbePlan& plan) {
    if (plan.labels.empty()) throw Error(ErrorCode::shape_error, "probe plan has no input labels");
    struct Slot {
        std::vector<Violation> violations;
        double margin = -std::numeric_limits<double>::infinity();
        std::size_t evals = 0;
    };
    std::vector<Slot> slots(plan.count);
    parallel_for(plan.count, plan.threads, [&](std::size_t i) {
        auto rng = item_rng(plan.seed, i);
        const StateFunction xi1 = random_history(sys.state_box(), sys.delta(), plan.history_samples, plan.kink_probes, rng);
        const StateFunction xi2 = random_history(sys.state_box(), sys.delta(), plan.history_samples, plan.kink_probes, rng);
        std::vector<Vector> u1, u2;
        for (std::size_t k = 0; k < plan.horizon_steps; ++k) {
            u1.push_back(plan.labels[pick(rng, plan.labels.size())]);
            u2.push_back(plan.same_input ? u1.back() : plan.labels[pick(rng, plan.labels.size())]);
        }
        try {
            slots[i].violations =
                delta_iss_violations(sys, cert, xi1, xi2, u1, u2, plan.tau, plan.substeps, &slots[i].margin, &slots[i].evals);
        } catch (const Error& e) {
            throw Error(e.code(), "probe " + std::to_string(i) + ": " + e.detail());
        }
        for (auto& v : slots[i].violations) v.probe = i;
    });
    FalsificationReport report;
    report.check = "delta-iss";
    report.probes = plan.count;
    for (auto& s : slots) {
        report.evaluations += s.evals;
        report.worst_margin = std::max(report.worst_margin, s.margin);
        report.violations.insert(report.violations.end(), s.violations.begin(), s.violations.end());
    }
    return report;
}

StateFunction subtract(const StateFunction& a, const StateFunction& b) {
    if (a.dim() != b.dim() || a.count() != b.count() || a.delta() != b.delta())
        throw Error(ErrorCode::shape_error, "histories are sampled on different grids");
    std::vector<double> d(a.samples().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.samples()[i] - b.samples()[i];
    return StateFunction(a.delta(), a.dim(), std::move(d));
}

LKFunctional point_quadratic_lk(KFunction alpha3, KFunction rho) {
    LKFunctional lk{
        [](const StateFunction& x1, const StateFunction& x2) {
            const double d = inf_distance(x1.now(), x2.now());
            return d * d;
        },
        [](const StateFunction& e) { return e.sup_norm(); },
        KFunction(1.0, 2.0), KFunction(1.0, 2.0), alpha3, rho, KFunction(1.0, 1.0), KFunction(1.0, 1.0)};
    return lk;
}

LKFunctional weighted_quadratic_lk(double mu, double rate, double delta, KFunction alpha3, KFunction rho) {
    auto energy = [rate](const StateFunction& e) {
        return integrate_samples(e, rate, [&](std::size_t j) {
            const double v = inf_norm(e.at(j));
            return v * v;
        });
    };
    LKFunctional lk{
        [mu, energy](const StateFunction& x1, const StateFunction& x2) {
            const StateFunction e = subtract(x1, x2);
            const double e0 = inf_norm(e.now());
            return e0 * e0 + mu * energy(e);
        },
        [energy](const StateFunction& e) {
            const double e0 = inf_norm(e.now());
            return std::sqrt(e0 * e0 + energy(e));
        },
        KFunction(1.0, 2.0), KFunction(std::max(1.0, mu), 2.0), alpha3, rho, KFunction(1.0, 1.0),
        KFunction(std::sqrt(1.0 + delta), 1.0)};
    return lk;
}

DriverEstimate driver_derivative(const LKFunctional& lk, const StateFunction& x1, const StateFunction& x2,
                                 std::span<const double> u1, std::span<const double> u2,
                                 const TimeDelaySystem& sys, std::span<const double> theta_ladder) {
    static const double default_ladder[] = {1e-2, 1e-3, 1e-4};
    if (theta_ladder.empty()) theta_ladder = default_ladder;
    for (std::size_t k = 0; k < theta_ladder.size(); ++k) {
        if (!(theta_ladder[k] > 0.0) || (k > 0 && !(theta_ladder[k] < theta_ladder[k - 1])))
            throw Error(ErrorCode::shape_error, "theta ladder must be positive and strictly decreasing");
        if (theta_ladder[k] >= x1.delta())
            throw Error(ErrorCode::shape_error, "theta ladder must stay below the delay");
    }
    if (x1.count() != x2.count()) throw Error(ErrorCode::shape_error, "histories are sampled on different grids");

    // Refine the grid until every theta is a whole number of steps, so the
    // shifted part of x^theta is an exact index shift.
    const double g = x1.grid_step();
    std::size_t refine = 0;
    for (std::size_t r = 1; r <= 100000 && refine == 0; ++r) {
        const double d = g / static_cast<double>(r);
        bool ok = true;
        for (double th : theta_ladder) {
            const double q = th / d;
            if (std::abs(q - std::round(q)) > 1e-6 * std::max(1.0, q)) {
                ok = false;
                break;
            }
        }
        if (ok) refine = r;
    }
    if (refine == 0) throw Error(ErrorCode::shape_error, "theta ladder is incommensurate with the history grid");

    const std::size_t n = x1.dim();
    const std::size_t count = (x1.count() - 1) * refine + 1;
    const double d = x1.delta() / static_cast<double>(count - 1);
    auto resample = [&](const StateFunction& x) {
        return StateFunction::sample(x.delta(), count, n, [&](double s) { return x.value_at(s); });
    };
    const StateFunction y1 = resample(x1);
    const StateFunction y2 = resample(x2);
    const Vector f1 = sys.evaluate_rhs(x1, u1);
    const Vector f2 = sys.evaluate_rhs(x2, u2);
    auto shifted = [&](const StateFunction& y, const Vector& f, std::size_t m) {
        std::vector<double> buf(count * n);
        for (std::size_t j = 0; j < count; ++j) {
            if (j + m < count - 1 || (j + m == count - 1 && m == 0)) {
                const auto v = y.at(j + m);
                std::copy(v.begin(), v.end(), buf.begin() + static_cast<std::ptrdiff_t>(j * n));
            } else {
                const double s_plus_theta = static_cast<double>(static_cast<std::ptrdiff_t>(j + m) -
                                                                static_cast<std::ptrdiff_t>(count - 1)) * d;
                for (std::size_t i = 0; i < n; ++i) buf[j * n + i] = y.now()[i] + s_plus_theta * f[i];
            }
        }
        return StateFunction(y.delta(), n, std::move(buf));
    };

    const double base = lk.value(y1, y2);
    DriverEstimate est;
    for (double th : theta_ladder) {
        const auto m = static_cast<std::size_t>(std::llround(th / d));
        const double v = lk.value(shifted(y1, f1, m), shifted(y2, f2, m));
        est.ladder_values.push_back((v - base) / th);
    }
    est.value = est.ladder_values.back();
    const std::size_t k = est.ladder_values.size();
    if (k >= 2) est.spread = std::abs(est.ladder_values[k - 1] - est.ladder_values[k - 2]);
    if (k >= 3) {
        const double prev = std::abs(est.ladder_values[k - 2] - est.ladder_values[k - 3]);
        if (est.spread > prev && est.spread > 1e-8 * (1.0 + std::abs(est.value)))
            throw Error(ErrorCode::driver_derivative_unstable, "finite-difference ladder does not converge");
    }
    return est;
}

FalsificationReport check_lk_functional(const TimeDelaySystem& sys, const LKFunctional& lk, const ProbePlan& plan) {
    if (plan.labels.empty()) throw Error(ErrorCode::shape_error, "probe plan has no input labels");
    struct Slot {
        std::vector<Violation> violations;
        double margin = -std::numeric_limits<double>::infinity();
        std::size_t evals = 0;
    };
    std::vector<Slot> slots(plan.count);
    parallel_for(plan.count, plan.threads, [&](std::size_t i) {
        auto rng = item_rng(plan.seed, i);
        const StateFunction x1 = random_history(sys.state_box(), sys.delta(), plan.history_samples, plan.kink_probes, rng);
        const StateFunction x2 = random_history(sys.state_box(), sys.delta(), plan.history_samples, plan.kink_probes, rng);
        const Vector u1 = plan.labels[pick(rng, plan.labels.size())];
        const Vector u2 = plan.same_input ? u1 : plan.labels[pick(rng, plan.labels.size())];
        Slot& slot = slots[i];
        auto record = [&](const std::string& cond, double lhs, double rhs, double slack) {
            ++slot.evals;
            slot.margin = std::max(slot.margin, lhs - rhs - slack);
            if (exceeds(lhs, rhs + slack)) slot.violations.push_back(Violation{i, 0.0, lhs, rhs, cond});
        };
        const StateFunction e = subtract(x1, x2);
        const double v = lk.value(x1, x2);
        const double ma = lk.gauge(e);
        const double e0 = inf_norm(e.now());
        record("lower-bound", lk.alpha1(e0), v, 0.0);
        record("upper-bound", v, lk.alpha2(ma), 0.0);
        record("gauge-lower", lk.gauge_lower(e0), ma, 0.0);
        record("gauge-upper", ma, lk.gauge_upper(e.sup_norm()), 0.0);
        if (ma >= lk.rho(inf_distance(u1, u2))) {
            DriverEstimate d;
            try {
                d = driver_derivative(lk, x1, x2, u1, u2, sys);
            } catch (const Error& err) {
                throw Error(err.code(), "probe " + std::to_string(i) + ": " + err.detail());
            }
            record("decrease", d.value, -lk.alpha3(ma), d.spread);
        }
    });
    FalsificationReport report;
    report.check = "lk-functional";
    report.probes = plan.count;
    for (auto& s : slots) {
        report.evaluations += s.evals;
        report.worst_margin = std::max(report.worst_margin, s.margin);
        report.violations.insert(report.violations.end(), s.violations.begin(), s.violations.end());
    }
    return report;
}

}  // namespace tdsym
