#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace aodmap {

struct AerosolComponent {
    int id = 0;  // catalogue number, e.g. 1, 2, 3, 6, 8, 14, 19, 21
    std::string category;
    double r_min = 0.0;  // um
    double r_max = 0.0;  // um
    double r_c = 0.0;    // characteristic radius, um
    double width = 0.0;  // log-normal distribution width
    double ssa_558 = 1.0;
};

struct ComponentLibrary {
    std::vector<AerosolComponent> components;

    int size() const { return static_cast<int>(components.size()); }
    std::vector<int> ids() const;
};

// Throws ConfigError on duplicate ids, fewer than two components, or bad radii/SSA.
void validate(const ComponentLibrary& library);

// The eight mixture components used operationally (small/medium/large
// spherical non-absorbing, two absorbing small spheres, two dust modes).
ComponentLibrary default_component_library();

// Per-component piecewise-linear tau -> radiance curves on shared knots.
struct RadianceTable {
    std::vector<double> tau_knots;  // strictly ascending
    int components = 0;
    int channels = 0;
    std::vector<double> values;  // components x knots x channels
    std::uint64_t seed = 0;

    int knots() const { return static_cast<int>(tau_knots.size()); }
    double value(int m, int k, int c) const {
        return values[(static_cast<std::size_t>(m) * knots() + k) * channels + c];
    }
    std::span<const double> knot_row(int m, int k) const {
        return {values.data() + (static_cast<std::size_t>(m) * knots() + k) * channels,
                static_cast<std::size_t>(channels)};
    }
};

void validate(const RadianceTable& table);

// sum_m theta_m * interp_m(tau), written into out (length = channels).
// Throws DomainError when tau lies outside the knot range.
void eval_radiance(const RadianceTable& table, double tau, std::span<const double> theta, std::span<double> out);
std::vector<double> eval_radiance(const RadianceTable& table, double tau, std::span<const double> theta);

struct SyntheticTableOptions {
    int channels = 36;
    int knots = 25;
    double tau_max = 6.0;
    std::uint64_t seed = 0;
};

// Deterministic synthetic stand-in for a radiative-transfer lookup table.
// Channels are laid out band-major (4 bands x 9 view angles when channels = 36);
// the tau = 0 row is the component-independent surface signal and each
// component's curve rises strictly with tau at a rate set by its radius and SSA.
RadianceTable build_synthetic_table(const ComponentLibrary& library, const SyntheticTableOptions& options);

// L^RT(tau, theta). Implementations must be safe for concurrent const use.
class ForwardModel {
public:
    virtual ~ForwardModel() = default;

    virtual int channels() const = 0;
    virtual int components() const = 0;
    virtual double tau_min() const = 0;
    virtual double tau_max() const = 0;
    virtual void radiance(double tau, std::span<const double> theta, std::span<double> out) const = 0;

    std::vector<double> radiance(double tau, std::span<const double> theta) const {
        std::vector<double> out(static_cast<std::size_t>(channels()));
        radiance(tau, theta, out);
        return out;
    }
};

class TableForwardModel final : public ForwardModel {
public:
    explicit TableForwardModel(RadianceTable table);

    int channels() const override { return table_.channels; }
    int components() const override { return table_.components; }
    double tau_min() const override { return table_.tau_knots.front(); }
    double tau_max() const override { return table_.tau_knots.back(); }
    void radiance(double tau, std::span<const double> theta, std::span<double> out) const override {
        eval_radiance(table_, tau, theta, out);
    }
    using ForwardModel::radiance;

    const RadianceTable& table() const { return table_; }

private:
    RadianceTable table_;
};

}  // namespace aodmap
