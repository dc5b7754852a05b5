#include "wavemgt/experiments/profiles.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "wavemgt/error.hpp"

namespace wavemgt::experiments {
namespace {

struct Term {
  std::string name;
  std::vector<double> args;
};

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\n");
  return std::string(s.substr(a, b - a + 1));
}

double parse_number(const std::string& text, const std::string& term) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ValidationError("profile term '" + term + "': bad number '" + t + "'");
  }
  return v;
}

std::vector<Term> parse_expression(const std::string& expr) {
  std::vector<Term> terms;
  std::size_t pos = 0;
  while (pos <= expr.size()) {
    // split on '+' at depth zero
    int depth = 0;
    std::size_t end = pos;
    for (; end < expr.size(); ++end) {
      if (expr[end] == '(') ++depth;
      if (expr[end] == ')') --depth;
      if (expr[end] == '+' && depth == 0) break;
    }
    const std::string raw = trim(std::string_view(expr).substr(pos, end - pos));
    if (raw.empty()) throw ValidationError("profile '" + expr + "': empty term");
    Term t;
    const auto open = raw.find('(');
    if (open == std::string::npos) {
      t.name = raw;
    } else {
      if (raw.back() != ')') throw ValidationError("profile term '" + raw + "': missing ')'");
      t.name = trim(std::string_view(raw).substr(0, open));
      const std::string inner = raw.substr(open + 1, raw.size() - open - 2);
      std::stringstream ss(inner);
      std::string item;
      while (std::getline(ss, item, ',')) t.args.push_back(parse_number(item, raw));
    }
    if (t.name == "zero") {
      if (!t.args.empty()) throw ValidationError("profile term 'zero' takes no arguments");
    } else if (t.name == "mode") {
      if (t.args.size() != 2) throw ValidationError("profile term '" + raw + "': mode(k, amp)");
      if (t.args[0] != std::floor(t.args[0]) || t.args[0] < 1) {
        throw ValidationError("profile term '" + raw + "': mode index must be a positive integer");
      }
    } else if (t.name == "gauss") {
      if (t.args.size() != 3) {
        throw ValidationError("profile term '" + raw + "': gauss(center, width, amp)");
      }
      if (!(t.args[1] > 0.0)) throw ValidationError("profile term '" + raw + "': width > 0 violated");
    } else {
      throw ValidationError("unknown profile '" + t.name + "' (expected mode, gauss or zero)");
    }
    terms.push_back(std::move(t));
    pos = end + 1;
  }
  return terms;
}

}  // namespace

void check_profile(const ProfileSpec& spec, int n_modes) {
  if (const auto* coeffs = std::get_if<std::vector<double>>(&spec.source)) {
    if (static_cast<int>(coeffs->size()) > n_modes) {
      std::ostringstream msg;
      msg << "coefficient list longer than n_modes: " << coeffs->size() << " > " << n_modes;
      throw ValidationError(msg.str());
    }
    for (double c : *coeffs) {
      if (!std::isfinite(c)) throw ValidationError("coefficient list contains a non-finite value");
    }
    return;
  }
  for (const Term& t : parse_expression(std::get<std::string>(spec.source))) {
    if (t.name == "mode" && t.args[0] > n_modes) {
      std::ostringstream msg;
      msg << "mode index " << t.args[0] << " exceeds n_modes " << n_modes;
      throw ValidationError(msg.str());
    }
  }
}

SpectralField evaluate_profile(const ProfileSpec& spec, const Basis& basis) {
  const int n = basis.size();
  check_profile(spec, n);
  SpectralField out = SpectralField::zero(n);
  if (const auto* coeffs = std::get_if<std::vector<double>>(&spec.source)) {
    for (std::size_t i = 0; i < coeffs->size(); ++i) out.coeffs[static_cast<Eigen::Index>(i)] = (*coeffs)[i];
    return out;
  }
  for (const Term& t : parse_expression(std::get<std::string>(spec.source))) {
    if (t.name == "mode") {
      out.coeffs[static_cast<Eigen::Index>(t.args[0]) - 1] += t.args[1];
    } else if (t.name == "gauss") {
      const Eigen::VectorXd& x = basis.nodes();
      Eigen::VectorXd g(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double r = (x[j] - t.args[0]) / t.args[1];
        g[j] = t.args[2] * std::exp(-r * r);
      }
      out += from_physical(g, basis);
    }
  }
  return out;
}

}  // namespace wavemgt::experiments
