#pragma once

#include "cgnn/model.hpp"

#include "json.hpp"

#include <filesystem>

namespace cgnn::model {

/// Builds and validates a ModelSpec from a config document.
///
/// Sections: dimensions {n, P}; amplification[i] {expr, a_lo, a_hi, A_expr};
/// selfsignal[i] {expr, beta_expr, beta_star_expr?}; outer[i] {F_expr, zeta, sigma};
/// input[i] {expr}; coupling_c[] {i, j, l, p, c_expr, h_expr, gamma1, gamma2,
/// tau_expr, tau_tilde_expr}; coupling_d[] {i, j, l, p, d_expr, f_expr, mu1, mu2,
/// g_expr, g_tilde_expr, xi, xi_tilde, kernel, kernel_tilde};
/// initial[k] {phi: [expr per component], bound}; optional checks {t_max, u_max}.
/// Indices in the document are 1-based. Throws ModelError naming the section.
ModelSpec build_model(const nlohmann::json& document);

/// Inverse of build_model (expressions keep their source text).
nlohmann::json to_document(const ModelSpec& spec);

KernelMeasure kernel_from_json(const nlohmann::json& j, const std::string& section);
nlohmann::json kernel_to_json(const KernelMeasure& k);

/// Reads and builds a config file. Throws ModelError (section "file") on I/O
/// or JSON syntax errors.
ModelSpec load_model(const std::filesystem::path& path);

void save_model(const ModelSpec& spec, const std::filesystem::path& path);

}  // namespace cgnn::model
