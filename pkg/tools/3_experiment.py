import glob
import os

import streamlit as st

from libs.dataformatter import parse_config
from libs.errors import TrendPermError
from libs.experiment import RESULT_COLUMNS, run_experiment

CONFIG_DIR = 'config/experiments'


@st.cache_data(show_spinner=False)
def run_config(text, workers):
    return run_experiment(parse_config(text), workers=workers).frame


### INICIA INTERFACE ###
st.title('🧪 Experiment')
st.write('Monte Carlo rejection rates for a declarative config.')
st.divider()

shipped = sorted(glob.glob(os.path.join(CONFIG_DIR, 'table*.cfg')))
choice = st.selectbox('Shipped config', shipped, format_func=os.path.basename)
uploaded = st.file_uploader('...or upload a config', type=['cfg', 'txt'])
if uploaded is not None:
    initial = uploaded.getvalue().decode('utf-8')
elif choice:
    with open(choice, 'r', encoding='utf-8') as f:
        initial = f.read()
else:
    initial = ''

text = st.text_area('Config', value=initial, height=260)
workers = st.number_input('Workers', min_value=1, max_value=os.cpu_count() or 1, value=1)
st.caption('Full tables run 1000 simulations x 1000 permutations per cell; lower n_sims for a quick look.')

if st.button('Run experiment', type='primary', use_container_width=True):
    try:
        with st.spinner('Running...'):
            frame = run_config(text, int(workers))
        st.session_state['experiment_results'] = frame
    except TrendPermError as e:
        st.error(f'Config error: {e}')

frame = st.session_state.get('experiment_results')
if frame is not None:
    failed = int(frame['reject_rate'].isna().sum())
    if failed:
        st.warning(f'{failed} row(s) failed; their rates are shown as "failed" in the CSV.')
    pivot = frame.pivot_table(index=['param', 'method'], columns='n', values='reject_rate')
    st.dataframe(pivot, use_container_width=True)
    st.download_button('Download CSV', frame[RESULT_COLUMNS].to_csv(index=False, na_rep='failed'),
                       file_name='results.csv', mime='text/csv')
