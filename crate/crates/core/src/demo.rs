//! Two sample assignments from an R statistical computing course, one per
//! pedagogical mode. Used by `seed-demo` and the golden prompt tests.

use chrono::{DateTime, Utc};

use crate::domain::{Homework, HomeworkId, Mode, UserId};

pub const DATA_TYPES_TITLE: &str = "Data types";

pub const DATA_TYPES_STATEMENT: &str = "In R, explain the differences between the basic data types we covered in class: \
logical, integer, double (numeric), character and factor. For each one, show how to create a value of that type and \
say what `typeof()` and `class()` return for it. Then explain what happens when values of different types are \
combined in one vector with `c()`.";

pub const DATA_TYPES_SOLUTION: &str = "Logical values are TRUE and FALSE and typeof returns logical. \
Integers are whole numbers written with an L suffix such as 5L and typeof returns integer, while a plain number like 5 \
is a double: typeof returns double and class returns numeric. Character values are strings in quotes and typeof returns character. \
A factor stores categories as integer codes together with a levels attribute that maps each code to its label, \
so typeof(factor(c(\"a\", \"b\"))) is integer while class() is factor. \
Combining types with c() coerces every element to the most flexible type in the order logical, integer, double, character, \
so c(1, \"a\", TRUE) is a character vector.";

pub const BOOTSTRAP_TITLE: &str = "Discovering Bootstrap";

pub const BOOTSTRAP_STATEMENT: &str = "We want to know how uncertain the median of a small sample is, but we have no \
formula for its standard error. The data are `x <- c(12, 15, 9, 22, 17, 14, 30, 11, 16, 19)`. Work with the tutor to \
come up with a way to estimate the variability of the sample median using only these ten numbers, and write R code \
that carries it out.";

pub const BOOTSTRAP_SOLUTION: &str = "Guidance for the tutor. Do not name the bootstrap until the student has described the idea in their own words.
Step 1: ask what we would do if we could draw many new samples from the population. Let the student simulate this with a known population, for example rnorm(10, mean = 15, sd = 5), and compute the median of each sample to see how much it varies.
Step 2: ask what could stand in for the population when all we have is the observed sample. Steer toward treating the sample itself as the population.
Step 3: ask how to draw a new sample of the same size from the observed data, and why it has to be with replacement (without replacement every resample is just a permutation of x).
Step 4: have the student repeat the resampling many times, for example B = 2000, keep the medians, and use the standard deviation of those medians as the standard error and their 2.5% and 97.5% quantiles as an interval.
Reference: course textbook, chapter on resampling methods, section on the nonparametric bootstrap.
Reference code:
```r
meds <- replicate(2000, median(sample(x, replace = TRUE)))
sd(meds)
quantile(meds, c(0.025, 0.975))
```";

fn build(
    title: &str,
    statement: &str,
    solution: &str,
    mode: Mode,
    author: &UserId,
    at: DateTime<Utc>,
) -> Homework {
    Homework {
        id: HomeworkId::generate(),
        title: title.to_owned(),
        problem_statement: statement.to_owned(),
        solution: solution.to_owned(),
        mode,
        created_by: author.clone(),
        created_at: at,
        due_at: None,
    }
}

pub fn data_types(author: &UserId, at: DateTime<Utc>) -> Homework {
    build(
        DATA_TYPES_TITLE,
        DATA_TYPES_STATEMENT,
        DATA_TYPES_SOLUTION,
        Mode::Recall,
        author,
        at,
    )
}

pub fn discovering_bootstrap(author: &UserId, at: DateTime<Utc>) -> Homework {
    build(
        BOOTSTRAP_TITLE,
        BOOTSTRAP_STATEMENT,
        BOOTSTRAP_SOLUTION,
        Mode::Discovery,
        author,
        at,
    )
}
