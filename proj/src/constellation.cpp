#include "pfshape/constellation.hpp"

#include "pfshape/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pfshape {

Constellation::Constellation(std::vector<Complex> points, std::string label)
    : points_(std::move(points)), label_(std::move(label))
{
    if (points_.empty())
        throw Error(ErrorCode::InvalidInput, "constellation must contain at least one point");
    for (const auto& x : points_) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw Error(ErrorCode::InvalidInput, "constellation point is not finite");
    }
    // Sort a copy to find duplicates in O(m log m).
    std::vector<Complex> sorted = points_;
    std::sort(sorted.begin(), sorted.end(), [](const Complex& a, const Complex& b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorCode::InvalidInput, "constellation points must be distinct");

    energies_.reserve(points_.size());
    for (const auto& x : points_)
        energies_.push_back(std::norm(x));
}

Constellation Constellation::scaled(double factor) const
{
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw Error(ErrorCode::InvalidScale, "scale factor must be positive");
    std::vector<Complex> pts(points_.begin(), points_.end());
    for (auto& x : pts)
        x *= factor;
    return Constellation(std::move(pts), label_);
}

Constellation make_square_qam(int order, double max_energy)
{
    if (order < 4)
        throw Error(ErrorCode::InvalidOrder, "QAM order must be a perfect square >= 4");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order)
        throw Error(ErrorCode::InvalidOrder, "QAM order " + std::to_string(order) + " is not a perfect square");
    if (!(max_energy > 0.0) || !std::isfinite(max_energy))
        throw Error(ErrorCode::InvalidScale, "max energy must be positive");

    // Odd-integer grid coordinates; the corner sits at (side-1, side-1).
    const double corner = static_cast<double>(side - 1);
    const double scale = std::sqrt(max_energy / (2.0 * corner * corner));

    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(order));
    for (int r = 0; r < side; ++r) {
        const double im = corner - 2.0 * r;
        for (int c = 0; c < side; ++c) {
            const double re = 2.0 * c - corner;
            pts.emplace_back(re * scale, im * scale);
        }
    }
    return Constellation(std::move(pts), std::to_string(order) + "-QAM");
}

EnergyRange feasible_energy_range(const Constellation& c) noexcept
{
    const auto [lo, hi] = std::minmax_element(c.energies().begin(), c.energies().end());
    return {*lo, *hi};
}

Constellation parse_constellation_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, std::string("constellation JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
        throw Error(ErrorCode::InvalidInput, "constellation JSON needs a \"points\" array");

    std::vector<Complex> pts;
    for (const auto& entry : doc["points"]) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
            throw Error(ErrorCode::InvalidInput, "each point must be [re, im]");
        pts.emplace_back(entry[0].get<double>(), entry[1].get<double>());
    }
    std::string label;
    if (doc.contains("label") && doc["label"].is_string())
        label = doc["label"].get<std::string>();
    return Constellation(std::move(pts), std::move(label));
}

Constellation load_constellation(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open constellation file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_constellation_json(buf.str());
}

} // namespace pfshape
