//! Static analysis of personal data flows in Java, JavaScript and
//! TypeScript code.

pub mod patterns;
pub mod report;
pub mod rulepack;
#[cfg(feature = "fs")]
pub mod scan;
pub mod stmt;
pub mod taint;
pub mod triage;
pub mod views;

#[cfg(test)]
mod test_support;
