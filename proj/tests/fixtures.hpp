#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "flexq/knowledge_base.hpp"
#include "flexq/label_catalog.hpp"
#include "flexq/query.hpp"
#include "flexq/relation.hpp"

namespace fixtures {

// Six-row employee sample. The two labels give Salary-Low to rows 1, 32,
// 520, 130 and Age-Young to rows 10, 20 at threshold 0.4.
inline constexpr const char* kEmployeeCsv =
    "id,Age,Salary\n"
    "1,40,400\n"
    "20,27,900\n"
    "520,45,430\n"
    "32,38,460\n"
    "10,29,780\n"
    "130,50,550\n";

inline constexpr const char* kEmployeeLabels =
    "Age    Young trapezoid 0 0 25 35\n"
    "Salary Low   trapezoid 0 0 400 700\n";

inline constexpr double kEmployeeThreshold = 0.4;

inline constexpr const char* kEmployeeQuery =
    "SELECT AVG(Salary) FROM employee WHERE Age IS Young AND Salary IS Low";

inline flexq::Relation employee() { return flexq::read_csv(std::string_view(kEmployeeCsv), "employee"); }
inline flexq::LabelCatalog employee_labels() { return flexq::parse_catalog(kEmployeeLabels); }
inline flexq::KnowledgeBase employee_kb() {
  return flexq::build_kb(employee(), employee_labels(), kEmployeeThreshold);
}

// Five labels over two rows; row 1 (age 25, salary 400) has degrees
// Young 0.7, Adult 0.3, Low 0.6, Middle 0.4, High 0.
inline constexpr const char* kFiveLabelCsv =
    "id,Age,Salary\n"
    "1,25,400\n"
    "2,27,550\n";

inline constexpr const char* kFiveLabels =
    "Age    Young  trapezoid 0 0 22 32\n"
    "Age    Adult  trapezoid 22 32 60 70\n"
    "Salary Low    trapezoid 0 0 340 490\n"
    "Salary Middle trapezoid 340 490 600 750\n"
    "Salary High   trapezoid 600 750 100000 100000\n";

// Random relation with columns X, Y, Z in [0, 100) and ids 1..m.
inline flexq::Relation random_relation(std::size_t m, std::mt19937_64& rng, std::string name = "r") {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<flexq::RowId> ids;
  std::vector<flexq::Column> cols{{"X", true, {}}, {"Y", true, {}}, {"Z", true, {}}};
  for (std::size_t i = 0; i < m; ++i) {
    ids.push_back(static_cast<flexq::RowId>(i + 1));
    for (auto& c : cols) c.values.push_back(u(rng));
  }
  return flexq::Relation(std::move(name), std::move(ids), std::move(cols));
}

// One random trapezoid label per column X, Y, Z, named L.
inline flexq::LabelCatalog random_labels(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-20.0, 120.0);
  flexq::LabelCatalog catalog;
  const char* attrs[] = {"X", "Y", "Z"};
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> p{u(rng), u(rng), u(rng), u(rng)};
    std::sort(p.begin(), p.end());
    catalog.add({attrs[i], "L", flexq::MembershipFunction::trapezoid(p[0], p[1], p[2], p[3])});
  }
  return catalog;
}

}  // namespace fixtures
