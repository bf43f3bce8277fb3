import os

import streamlit as st

from libs.dataformatter import parse_config
from libs.errors import TrendPermError
from libs.experiment import POWER_COLUMNS, run_power_study
from libs.power import prediction_table

CONFIG_DIR = 'config/experiments'

### INICIA INTERFACE ###
st.title('⚡ Local power')
st.write('Limiting power under the drift h·i/n^(3/2), and its Monte Carlo check.')
st.divider()

# THEORY
with st.container(border=True):
    st.subheader('Limiting power')
    cols = st.columns(3)
    with cols[0]:
        alpha = st.number_input('α', min_value=0.001, max_value=0.5, value=0.05, step=0.01)
    with cols[1]:
        base = st.selectbox('Base process', ['white noise', 'AR(1)'])
    with cols[2]:
        rho = st.slider('ρ', -0.95, 0.95, 0.5, 0.05, disabled=base == 'white noise')
    hs = [float(h) for h in range(0, 11)]
    try:
        table = prediction_table(hs, alpha, None if base == 'white noise' else rho)
        st.dataframe(table, hide_index=True, use_container_width=True)
    except TrendPermError as e:
        st.error(f'{e}')

# EMPIRICAL
with st.container(border=True):
    st.subheader('Power study')
    path = os.path.join(CONFIG_DIR, 'power_whitenoise.cfg')
    with open(path, 'r', encoding='utf-8') as f:
        text = st.text_area('Config', value=f.read(), height=220)
    workers = st.number_input('Workers', min_value=1, max_value=os.cpu_count() or 1, value=1, key='power_workers')
    if st.button('Run power study', type='primary', use_container_width=True):
        try:
            with st.spinner('Running...'):
                study = run_power_study(parse_config(text), workers=int(workers))
            st.dataframe(study.frame, hide_index=True, use_container_width=True)
            for column, gap in study.matches.items():
                st.caption(f"{column}: max gap {gap:.4f} ({'match' if gap <= 0.05 else 'no match'})")
            st.download_button('Download CSV', study.frame[POWER_COLUMNS].to_csv(index=False, na_rep='failed'),
                               file_name='power.csv', mime='text/csv')
        except TrendPermError as e:
            st.error(f'Power study failed: {e}')
