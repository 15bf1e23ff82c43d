#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "respsar/common.hpp"
#include "respsar/evaluation.hpp"
#include "respsar/geometry.hpp"
#include "respsar/imaging.hpp"
#include "respsar/mixture.hpp"
#include "respsar/scene.hpp"
#include "respsar/signal_cube.hpp"
#include "respsar/spatial_separation.hpp"

namespace respsar {

using json = nlohmann::json;

// ---- JSON conversions (units: meters, seconds, Hz, radians; complex as [re, im]) ----

inline void to_json(json& j, const Vec3& v) { j = json{{"x", v.x}, {"y", v.y}, {"z", v.z}}; }
inline void from_json(const json& j, Vec3& v) {
    j.at("x").get_to(v.x);
    j.at("y").get_to(v.y);
    j.at("z").get_to(v.z);
}

inline void to_json(json& j, const RespiratoryMotion& m) {
    json coeffs = json::array();
    for (const auto& c : m.coeffs) coeffs.push_back(json::array({c.real(), c.imag()}));
    j = json{{"omega_r", m.omega_r}, {"coeffs", coeffs}};
}
inline void from_json(const json& j, RespiratoryMotion& m) {
    if (j.contains("omega_r")) {
        j.at("omega_r").get_to(m.omega_r);
    } else {
        m.omega_r = 2.0 * kPi * j.at("f_r").get<double>();
    }
    m.coeffs.clear();
    for (const auto& c : j.at("coeffs")) {
        m.coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
    }
}

inline void to_json(json& j, const Scatterer& s) {
    j = json{{"position", s.position}, {"reflectivity", s.reflectivity}, {"motion", s.motion}};
}
inline void from_json(const json& j, Scatterer& s) {
    j.at("position").get_to(s.position);
    j.at("reflectivity").get_to(s.reflectivity);
    if (j.contains("motion")) {
        j.at("motion").get_to(s.motion);
    } else {
        s.motion = RespiratoryMotion::none();
    }
}

inline void to_json(json& j, const Scene& s) {
    j = json{{"scatterers", s.scatterers}, {"noise_sigma", s.noise_sigma}, {"rng_seed", s.rng_seed}};
}
inline void from_json(const json& j, Scene& s) {
    s.scatterers = j.value("scatterers", std::vector<Scatterer>{});
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.rng_seed = j.value("rng_seed", std::uint64_t{0});
}

inline void to_json(json& j, const RadarConfig& r) {
    j = json{{"wavelength", r.wavelength},
             {"bandwidth", r.bandwidth},
             {"slow_time_rate", r.slow_time_rate},
             {"num_elements", r.num_elements},
             {"element_spacing", r.element_spacing}};
}
inline void from_json(const json& j, RadarConfig& r) {
    if (j.contains("wavelength")) {
        j.at("wavelength").get_to(r.wavelength);
    } else {
        r.wavelength = kSpeedOfLight / j.at("center_frequency").get<double>();
    }
    j.at("bandwidth").get_to(r.bandwidth);
    j.at("slow_time_rate").get_to(r.slow_time_rate);
    j.at("num_elements").get_to(r.num_elements);
    j.at("element_spacing").get_to(r.element_spacing);
}

inline void to_json(json& j, const ScanTrajectory& t) {
    j = json{{"origin", t.origin}, {"velocity", t.velocity}, {"duration", t.duration}};
}
inline void from_json(const json& j, ScanTrajectory& t) {
    j.at("origin").get_to(t.origin);
    j.at("velocity").get_to(t.velocity);
    j.at("duration").get_to(t.duration);
}

inline void to_json(json& j, const MixtureParams& p) {
    json coeffs = json::array();
    for (const auto& c : p.coeffs) coeffs.push_back(std::vector<double>(c.begin(), c.end()));
    j = json{{"M", p.num_components},
             {"pi", p.pi},
             {"omega_r_rad_s", p.omega_r},
             {"C", coeffs},
             {"sigma_hz", p.sigma}};
}
inline void from_json(const json& j, MixtureParams& p) {
    j.at("M").get_to(p.num_components);
    j.at("pi").get_to(p.pi);
    j.at("omega_r_rad_s").get_to(p.omega_r);
    j.at("sigma_hz").get_to(p.sigma);
    p.coeffs.clear();
    for (const auto& row : j.at("C")) {
        TrajectoryCoeffs c{};
        for (std::size_t i = 0; i < 6; ++i) c[i] = row.at(i).get<double>();
        p.coeffs.push_back(c);
    }
}

inline void to_json(json& j, const MetricsReport& r) {
    auto num_or_null = [](double v) { return std::isfinite(v) ? json(round_sig(v, 12)) : json(nullptr); };
    j = json{{"mb_sharpness_conventional", num_or_null(r.mb_sharpness_conventional)},
             {"mb_sharpness_proposed", num_or_null(r.mb_sharpness_proposed)},
             {"rmse_conventional", num_or_null(r.rmse_conventional)},
             {"rmse_proposed", num_or_null(r.rmse_proposed)},
             {"correlation", num_or_null(r.correlation)},
             {"window_count", r.window_count}};
}

// ---- helpers ----

inline json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

inline void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

inline Scene load_scene(const std::filesystem::path& path) { return load_json(path).get<Scene>(); }

namespace detail {
inline void write_f32(std::ofstream& out, const float* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
}
inline void read_f32(std::ifstream& in, float* data, std::size_t n) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw Error("binary file truncated");
}
} // namespace detail

// ---- SignalCube files: float32 (re, im) pairs, range-major then angle then time ----

inline void save_cube(const SignalCube& cube, const std::filesystem::path& bin_path) {
    cube.validate();
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw Error("cannot write " + bin_path.string());
    std::vector<float> buf(cube.values.size() * 2);
    for (std::size_t i = 0; i < cube.values.size(); ++i) {
        buf[2 * i] = static_cast<float>(cube.values[i].real());
        buf[2 * i + 1] = static_cast<float>(cube.values[i].imag());
    }
    detail::write_f32(out, buf.data(), buf.size());

    json meta{{"dtype", "complex64"},
              {"layout", "range,angle,time"},
              {"num_range_bins", cube.num_range_bins},
              {"num_angle_bins", cube.num_angle_bins},
              {"num_samples", cube.num_samples},
              {"range_bin_size_m", cube.range_bin_size},
              {"range_offset_m", cube.range_offset},
              {"angle_grid_rad", cube.angle_grid},
              {"sample_rate_hz", cube.sample_rate},
              {"t_start_s", cube.t_start},
              {"wavelength_m", cube.wavelength},
              {"array_axis", cube.array_axis}};
    save_json(meta, std::filesystem::path(bin_path).replace_extension(".meta.json"));
}

inline SignalCube load_cube(const std::filesystem::path& bin_path) {
    const json meta = load_json(std::filesystem::path(bin_path).replace_extension(".meta.json"));
    SignalCube cube;
    meta.at("num_range_bins").get_to(cube.num_range_bins);
    meta.at("num_angle_bins").get_to(cube.num_angle_bins);
    meta.at("num_samples").get_to(cube.num_samples);
    meta.at("range_bin_size_m").get_to(cube.range_bin_size);
    meta.at("range_offset_m").get_to(cube.range_offset);
    meta.at("angle_grid_rad").get_to(cube.angle_grid);
    meta.at("sample_rate_hz").get_to(cube.sample_rate);
    meta.at("t_start_s").get_to(cube.t_start);
    meta.at("wavelength_m").get_to(cube.wavelength);
    meta.at("array_axis").get_to(cube.array_axis);

    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw Error("cannot open " + bin_path.string());
    const std::size_t n = cube.num_range_bins * cube.num_angle_bins * cube.num_samples;
    std::vector<float> buf(n * 2);
    detail::read_f32(in, buf.data(), buf.size());
    cube.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) cube.values[i] = cplx(buf[2 * i], buf[2 * i + 1]);
    cube.validate();
    return cube;
}

// ---- Image / volume files: same convention, x-major then y then z ----

namespace detail {
inline json grid_meta(const ImageGrid& g, const char* dtype) {
    return json{{"dtype", dtype},
                {"layout", "x,y,z"},
                {"origin_m", g.origin},
                {"spacing_m", g.spacing},
                {"dims", g.dims}};
}
inline ImageGrid grid_from_meta(const json& meta) {
    ImageGrid g;
    meta.at("origin_m").get_to(g.origin);
    meta.at("spacing_m").get_to(g.spacing);
    meta.at("dims").get_to(g.dims);
    return g;
}
} // namespace detail

inline void save_image(const SarImage& img, const std::filesystem::path& bin_path) {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw Error("cannot write " + bin_path.string());
    std::vector<float> buf(img.values.size() * 2);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        buf[2 * i] = static_cast<float>(img.values[i].real());
        buf[2 * i + 1] = static_cast<float>(img.values[i].imag());
    }
    detail::write_f32(out, buf.data(), buf.size());
    json meta = detail::grid_meta(img.grid, "complex64");
    meta["coverage_warnings"] = img.coverage_warnings;
    save_json(meta, std::filesystem::path(bin_path).replace_extension(".meta.json"));
}

inline void save_volume(const RealVolume& vol, const std::filesystem::path& bin_path) {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw Error("cannot write " + bin_path.string());
    std::vector<float> buf(vol.values.size());
    for (std::size_t i = 0; i < vol.values.size(); ++i) buf[i] = static_cast<float>(vol.values[i]);
    detail::write_f32(out, buf.data(), buf.size());
    save_json(detail::grid_meta(vol.grid, "float32"),
              std::filesystem::path(bin_path).replace_extension(".meta.json"));
}

inline RealVolume load_volume(const std::filesystem::path& bin_path) {
    const json meta = load_json(std::filesystem::path(bin_path).replace_extension(".meta.json"));
    RealVolume vol;
    vol.grid = detail::grid_from_meta(meta);
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw Error("cannot open " + bin_path.string());
    std::vector<float> buf(vol.grid.num_voxels());
    detail::read_f32(in, buf.data(), buf.size());
    vol.values.assign(buf.begin(), buf.end());
    return vol;
}

/// 8-bit max-intensity projection along the y axis (depth), written as binary PGM.
inline void write_mip_pgm(const RealVolume& vol, const std::filesystem::path& path) {
    const auto& d = vol.grid.dims;
    std::vector<double> mip(d[0] * d[2], 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < d[0]; ++i) {
        for (std::size_t j = 0; j < d[1]; ++j) {
            for (std::size_t k = 0; k < d[2]; ++k) {
                double& cell = mip[k * d[0] + i];
                cell = std::max(cell, vol.values[vol.grid.index(i, j, k)]);
                peak = std::max(peak, cell);
            }
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << d[0] << " " << d[2] << "\n255\n";
    for (double v : mip) {
        const int level = (peak > 0.0) ? static_cast<int>(255.0 * v / peak + 0.5) : 0;
        out.put(static_cast<char>(std::min(level, 255)));
    }
}

// ---- CSV ----

inline void write_points_csv(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "x_m,y_m,z_m\n";
    out.precision(12);
    for (const Vec3& p : cloud.points) {
        out << p.x << "," << p.y << "," << p.z << "\n";
    }
}

inline PointCloud read_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    PointCloud cloud;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Vec3 p;
        char comma;
        if (ss >> p.x >> comma >> p.y >> comma >> p.z) cloud.points.push_back(p);
    }
    return cloud;
}

inline void write_maxima_csv(const std::vector<LocalMaximum>& maxima,
                             const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "r_m,theta_rad,power\n";
    out.precision(12);
    for (const auto& m : maxima) {
        out << m.range << "," << m.theta << "," << m.power << "\n";
    }
}

} // namespace respsar
