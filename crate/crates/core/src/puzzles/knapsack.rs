//! 0/1 knapsack: pick items of maximal total utility under a weight limit.

use crate::bnb::Solution;
use crate::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId};
use crate::puzzles::{invalid, PuzzleError};

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub name: String,
    pub weight: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    pub items: Vec<Item>,
    pub capacity: f64,
}

impl KnapsackInstance {
    pub fn new(items: Vec<Item>, capacity: f64) -> Result<Self, PuzzleError> {
        if !capacity.is_finite() || capacity < 0.0 {
            return Err(invalid(format!("capacity {capacity} must be finite and non-negative")));
        }
        for item in &items {
            if !item.weight.is_finite() || item.weight < 0.0 || !item.utility.is_finite() {
                return Err(invalid(format!("item `{}` has bad weight or utility", item.name)));
            }
        }
        Ok(KnapsackInstance { items, capacity })
    }

    /// Reads `name,weight,utility` records. A first record whose weight is
    /// not a number is taken as a header.
    pub fn from_csv(text: &str, capacity: f64) -> Result<Self, PuzzleError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut items = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| invalid(e.to_string()))?;
            if record.len() != 3 {
                return Err(invalid(format!("record {}: expected name,weight,utility", k + 1)));
            }
            let weight = record[1].parse::<f64>();
            if k == 0 && weight.is_err() {
                continue;
            }
            let weight = weight.map_err(|_| invalid(format!("record {}: bad weight `{}`", k + 1, &record[1])))?;
            let utility =
                record[2].parse().map_err(|_| invalid(format!("record {}: bad utility `{}`", k + 1, &record[2])))?;
            items.push(Item { name: record[0].to_string(), weight, utility });
        }
        Self::new(items, capacity)
    }

    pub fn total_weight(&self, selected: &[usize]) -> f64 {
        selected.iter().map(|&k| self.items[k].weight).sum()
    }

    pub fn total_utility(&self, selected: &[usize]) -> f64 {
        selected.iter().map(|&k| self.items[k].utility).sum()
    }
}

#[derive(Debug, Clone)]
pub struct KnapsackModel {
    pub model: Model,
    pub instance: KnapsackInstance,
    /// `take[k]` is the variable of item `k`, named `x_{k+1}`.
    pub take: Vec<VarId>,
}

pub fn build_knapsack(instance: &KnapsackInstance) -> Result<KnapsackModel, PuzzleError> {
    let mut model = Model::new("knapsack");
    let take = (1..=instance.items.len()).map(|k| model.add_binary(format!("x_{k}"))).collect::<Result<Vec<_>, _>>()?;
    let weight: LinExpr = take.iter().zip(&instance.items).map(|(&v, it)| (v, it.weight)).collect();
    model.add_constraint("capacity", weight, Sense::Le, instance.capacity)?;
    let utility: LinExpr = take.iter().zip(&instance.items).map(|(&v, it)| (v, it.utility)).collect();
    model.set_objective(ObjectiveSense::Maximize, utility)?;
    Ok(KnapsackModel { model, instance: instance.clone(), take })
}

impl KnapsackModel {
    /// Indices of the selected items.
    pub fn decode(&self, solution: &Solution) -> Vec<usize> {
        self.take.iter().enumerate().filter(|(_, &v)| solution.is_one(v)).map(|(k, _)| k).collect()
    }

    pub fn selected_names(&self, solution: &Solution) -> Vec<&str> {
        self.decode(solution).into_iter().map(|k| self.instance.items[k].name.as_str()).collect()
    }
}
